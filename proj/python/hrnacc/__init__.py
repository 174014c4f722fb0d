from hrnacc._core import (
    CorpusDataError,
    CorpusParseError,
    Document,
    EmbeddingTable,
    PipelineConfigError,
    apply_rules,
    average_f1,
    b_cubed,
    ceaf_phi4,
    document_to_string,
    enumerate_spans,
    load_embedding_file,
    muc,
    parse_corpus,
    parse_corpus_file,
    parse_document,
    resolve_files,
    score_files,
    synthetic_embeddings,
    train_files,
)

__all__ = [
    "CorpusDataError",
    "CorpusParseError",
    "Document",
    "EmbeddingTable",
    "PipelineConfigError",
    "apply_rules",
    "average_f1",
    "b_cubed",
    "ceaf_phi4",
    "document_to_string",
    "enumerate_spans",
    "load_embedding_file",
    "muc",
    "parse_corpus",
    "parse_corpus_file",
    "parse_document",
    "resolve_files",
    "score_files",
    "synthetic_embeddings",
    "train_files",
]
