"""End-to-end smoke tests for the python bindings."""

import math
import os
import tempfile

import pytest

import hrnacc

DOC_TEXT = """#begin document py/d0
py/d0 0 0 the - - (0
py/d0 0 1 Halcyon - - -
py/d0 0 2 hotel - - 0)
py/d0 0 3 opened - - -

py/d0 1 4 the - - (0
py/d0 1 5 Halcyon - - -
py/d0 1 6 hotel - - 0)
py/d0 1 7 won - - -
#end document
"""


def test_parse_and_serialize_roundtrip():
    doc = hrnacc.parse_document(DOC_TEXT)
    assert doc.doc_id == "py/d0"
    assert doc.n_tokens == 8
    assert doc.sentences == [(0, 3), (4, 7)]
    assert doc.gold_clusters == [[(0, 2), (4, 6)]]
    assert doc.text_of((0, 2)) == "the Halcyon hotel"

    text = hrnacc.document_to_string(doc)
    again = hrnacc.parse_document(text)
    assert again.gold_clusters == doc.gold_clusters


def test_parse_errors_are_typed():
    with pytest.raises(hrnacc.CorpusParseError):
        hrnacc.parse_document("")


def test_synthetic_embeddings_shape_and_stability():
    doc = hrnacc.parse_document(DOC_TEXT)
    table = hrnacc.synthetic_embeddings(doc, 12, 7)
    vectors = table.vectors
    assert vectors.shape == (8, 12)
    # Identical words land on nearby vectors.
    a, b = vectors[1], vectors[5]
    cos = float((a * b).sum() / ((a * a).sum() ** 0.5 * (b * b).sum() ** 0.5))
    assert cos >= 0.9


def test_enumerate_spans_counts():
    doc = hrnacc.parse_document(DOC_TEXT)
    spans = hrnacc.enumerate_spans(doc, 2)
    assert len(spans) == 14  # two sentences of 4 tokens: (4 + 3) each


def test_rules_link_exact_repeats():
    doc = hrnacc.parse_document(DOC_TEXT)
    result = hrnacc.apply_rules(doc, [(0, 2), (4, 6)])
    assert result["linked"] == [[(0, 2), (4, 6)]]
    assert result["non_linked"] == []
    assert result["links"][0]["rule"] == "R2_EXACT"


def test_metrics_identity_and_hand_value():
    gold = [[(0, 0), (1, 1), (2, 2)]]
    system = [[(0, 0), (1, 1)], [(2, 2), (3, 3)]]
    assert hrnacc.muc(gold, gold)["f1"] == pytest.approx(1.0)
    assert hrnacc.muc(system, gold)["recall"] == pytest.approx(0.5)
    assert hrnacc.ceaf_phi4(gold, gold)["precision"] == pytest.approx(1.0)
    assert hrnacc.average_f1([0.935, 0.874, 0.854]) == pytest.approx(0.8876666666666667)


def test_train_resolve_score_files(tmp_path):
    corpus = tmp_path / "corpus.conll"
    corpus.write_text(DOC_TEXT)
    doc = hrnacc.parse_document(DOC_TEXT)

    emb_path = tmp_path / "emb.txt"
    table = hrnacc.synthetic_embeddings(doc, 8, 3)
    lines = [f"py/d0 8 {doc.n_tokens}"]
    for row in table.vectors:
        lines.append(" ".join(repr(float(v)) for v in row))
    emb_path.write_text("\n".join(lines) + "\n")

    ckpt = tmp_path / "model.ckpt"
    reports = hrnacc.train_files(
        str(corpus),
        str(emb_path),
        str(ckpt),
        {
            "epochs": 2,
            "batch_size": 1,
            "ffn_hidden": 8,
            "fnn_output_dim": 6,
            "rnn_hidden": 8,
            "feature_dim": 4,
            "dropout": 0.0,
            "seed": 9,
        },
    )
    assert len(reports) == 2
    for r in reports:
        assert math.isfinite(r["l_actor_aug"])
        assert r["l_actor_aug"] == pytest.approx(r["l_actor"] + r["l_detect"])
    assert ckpt.exists()

    out = tmp_path / "system.conll"
    n = hrnacc.resolve_files(str(corpus), str(emb_path), str(ckpt), str(out))
    assert n == 1
    assert out.exists()

    scores = hrnacc.score_files(str(corpus), str(corpus))
    assert scores["avg_f1"] == pytest.approx(1.0)
    assert set(scores) == {"muc", "b_cubed", "ceaf_phi4", "avg_f1"}
