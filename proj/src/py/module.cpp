#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "hrnacc/pipeline.hpp"

namespace py = pybind11;
using namespace hrnacc;

namespace {

using PySpan = std::pair<int, int>;
using PyClustering = std::vector<std::vector<PySpan>>;

std::vector<Span> to_spans(const std::vector<PySpan>& pairs) {
  std::vector<Span> out;
  out.reserve(pairs.size());
  for (const auto& [s, e] : pairs) out.push_back({s, e});
  return out;
}

std::vector<PySpan> from_spans(const std::vector<Span>& spans) {
  std::vector<PySpan> out;
  out.reserve(spans.size());
  for (const Span& s : spans) out.push_back({s.start, s.end});
  return out;
}

Clustering to_clustering(const PyClustering& clusters) {
  Clustering out;
  for (const auto& c : clusters) out.push_back(to_spans(c));
  return out;
}

PyClustering from_clustering(const Clustering& clusters) {
  PyClustering out;
  for (const auto& c : clusters) out.push_back(from_spans(c));
  return out;
}

py::dict triple_dict(const ScoreTriple& t) {
  py::dict d;
  d["precision"] = t.precision;
  d["recall"] = t.recall;
  d["f1"] = t.f1;
  return d;
}

PipelineConfig config_from_dict(const py::dict& overrides) {
  PipelineConfig cfg;
  for (auto item : overrides) {
    std::string key = py::str(item.first);
    std::string value = py::str(item.second);
    cfg.set(key, value);
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hybrid rule-neural actor-critic coreference resolver";

  py::register_exception<ParseError>(m, "CorpusParseError");
  py::register_exception<DataError>(m, "CorpusDataError");
  py::register_exception<ConfigError>(m, "PipelineConfigError");

  py::class_<Document>(m, "Document")
      .def_readonly("doc_id", &Document::doc_id)
      .def_readonly("genre", &Document::genre)
      .def_property_readonly("n_tokens",
                             [](const Document& d) { return int(d.tokens.size()); })
      .def_property_readonly("words",
                             [](const Document& d) {
                               std::vector<std::string> out;
                               for (const auto& t : d.tokens) out.push_back(t.word);
                               return out;
                             })
      .def_property_readonly("sentences",
                             [](const Document& d) { return from_spans(d.sentences); })
      .def_property_readonly("gold_clusters",
                             [](const Document& d) {
                               PyClustering out;
                               for (const auto& c : d.gold_clusters)
                                 out.push_back(from_spans(c.spans));
                               return out;
                             })
      .def("text_of",
           [](const Document& d, PySpan s) { return d.text_of({s.first, s.second}); })
      .def("__repr__", [](const Document& d) {
        return "<Document '" + d.doc_id + "', " + std::to_string(d.tokens.size()) + " tokens>";
      });

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_readonly("doc_id", &EmbeddingTable::doc_id)
      .def_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("vectors", [](const EmbeddingTable& t) {
        py::array_t<float> out({long(t.vectors.rows()), long(t.vectors.cols())});
        auto buf = out.mutable_unchecked<2>();
        for (long r = 0; r < t.vectors.rows(); ++r)
          for (long c = 0; c < t.vectors.cols(); ++c) buf(r, c) = t.vectors(r, c);
        return out;
      });

  m.def("parse_corpus", [](const std::string& text) { return parse_corpus(text); },
        py::arg("text"), "Parse every document from column-format text.");
  m.def("parse_corpus_file", &read_corpus_file, py::arg("path"));
  m.def("parse_document", &parse_document, py::arg("text"));
  m.def("document_to_string", &document_to_string, py::arg("doc"));

  m.def("synthetic_embeddings", &synthetic_embeddings, py::arg("doc"), py::arg("dim"),
        py::arg("seed"));
  m.def("load_embedding_file", &read_embedding_file, py::arg("path"));

  m.def("enumerate_spans",
        [](const Document& doc, int max_width) {
          return from_spans(enumerate_spans(doc, max_width));
        },
        py::arg("doc"), py::arg("max_width") = 10);

  m.def("apply_rules",
        [](const Document& doc, const std::vector<PySpan>& mentions, const std::string& rules) {
          std::vector<RuleLink> links;
          GroupPartition part = apply_rules(doc, to_spans(mentions), Lexicons::defaults(),
                                            RuleMask::parse(rules), &links);
          py::dict out;
          out["linked"] = from_clustering(part.linked.clusters);
          out["non_linked"] = from_spans(part.non_linked);
          py::list link_list;
          for (const RuleLink& l : links) {
            py::dict rec;
            rec["a"] = PySpan{l.mention_a.start, l.mention_a.end};
            rec["b"] = PySpan{l.mention_b.start, l.mention_b.end};
            rec["rule"] = rule_name(l.rule_id);
            link_list.append(rec);
          }
          out["links"] = link_list;
          return out;
        },
        py::arg("doc"), py::arg("mentions"), py::arg("rules") = "1,2,3,4");

  m.def("muc",
        [](const PyClustering& system, const PyClustering& gold) {
          return triple_dict(muc(to_clustering(system), to_clustering(gold)));
        },
        py::arg("system"), py::arg("gold"));
  m.def("b_cubed",
        [](const PyClustering& system, const PyClustering& gold) {
          return triple_dict(b_cubed(to_clustering(system), to_clustering(gold)));
        },
        py::arg("system"), py::arg("gold"));
  m.def("ceaf_phi4",
        [](const PyClustering& system, const PyClustering& gold) {
          return triple_dict(ceaf_phi4(to_clustering(system), to_clustering(gold)));
        },
        py::arg("system"), py::arg("gold"));
  m.def("average_f1", [](const std::vector<double>& f1s) {
    std::vector<ScoreTriple> triples;
    for (double f : f1s) triples.push_back({0.0, 0.0, f});
    return average_f1(triples);
  });

  m.def("train_files",
        [](const std::string& corpus, const std::string& embeddings, const std::string& out,
           const py::dict& config) {
          PipelineConfig cfg = config_from_dict(config);
          cfg.validate();
          auto docs = read_corpus_file(corpus);
          auto tables = read_embedding_file(embeddings);
          auto index = index_embeddings(tables);
          std::vector<const Document*> dp;
          std::vector<const EmbeddingTable*> ep;
          for (const auto& d : docs) {
            dp.push_back(&d);
            ep.push_back(&embeddings_for(d, index));
          }
          cfg.emb_dim = ep.empty() ? 0 : ep[0]->dim;
          std::vector<LossReport> reports;
          ModelParams params = train_corpus(dp, ep, cfg, &reports);
          std::ofstream os(out, std::ios::binary);
          if (!os) throw DataError("cannot write '" + out + "'");
          save_checkpoint(os, params, cfg.to_string());
          py::list rows;
          for (const LossReport& r : reports) {
            py::dict rec;
            rec["step"] = r.step;
            rec["epoch"] = r.epoch;
            rec["l_actor"] = r.l_actor;
            rec["l_critic"] = r.l_critic;
            rec["l_detect"] = r.l_detect;
            rec["l_actor_aug"] = r.l_actor_aug;
            rec["l_critic_aug"] = r.l_critic_aug;
            rows.append(rec);
          }
          return rows;
        },
        py::arg("corpus"), py::arg("embeddings"), py::arg("out"),
        py::arg("config") = py::dict());

  m.def("resolve_files",
        [](const std::string& corpus, const std::string& embeddings,
           const std::string& checkpoint, const std::string& out, bool use_rules, bool use_ac) {
          std::ifstream ck(checkpoint, std::ios::binary);
          if (!ck) throw DataError("cannot open checkpoint '" + checkpoint + "'");
          PipelineConfig cfg = PipelineConfig::from_string(read_checkpoint_config(ck));
          cfg.use_rules = use_rules && cfg.use_rules;
          cfg.use_ac = use_ac && cfg.use_ac;
          ModelParams params = ModelParams::init(cfg.model_dims(), cfg.seed, cfg.v_m_init);
          ck.seekg(0);
          load_checkpoint(ck, params);

          auto docs = read_corpus_file(corpus);
          auto tables = read_embedding_file(embeddings);
          auto index = index_embeddings(tables);
          std::vector<const Document*> dp;
          std::vector<const EmbeddingTable*> ep;
          for (const auto& d : docs) {
            dp.push_back(&d);
            ep.push_back(&embeddings_for(d, index));
          }
          PolicyMode mode =
              cfg.mode == "baseline" ? PolicyMode::Baseline : PolicyMode::Greedy;
          auto results =
              resolve_corpus(dp, ep, params, cfg, Lexicons::defaults(), mode);
          std::ofstream os(out);
          if (!os) throw DataError("cannot write '" + out + "'");
          for (size_t i = 0; i < docs.size(); ++i)
            serialize_document(os, docs[i], results[i].final_clusters.clusters);
          return int(docs.size());
        },
        py::arg("corpus"), py::arg("embeddings"), py::arg("checkpoint"), py::arg("out"),
        py::arg("use_rules") = true, py::arg("use_ac") = true);

  m.def("score_files",
        [](const std::string& gold, const std::string& system) {
          CorpusScore s = score_corpora(read_corpus_file(gold), read_corpus_file(system));
          py::dict out;
          out["muc"] = triple_dict(s.muc);
          out["b_cubed"] = triple_dict(s.b_cubed);
          out["ceaf_phi4"] = triple_dict(s.ceaf_phi4);
          out["avg_f1"] = s.avg_f1;
          return out;
        },
        py::arg("gold"), py::arg("system"));
}
