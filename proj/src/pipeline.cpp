#include "hrnacc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hrnacc/parallel.hpp"

namespace hrnacc {

namespace {

// Baseline inference: score every pair in sweep order with the supervised
// scorer and keep each mention's best antecedent above the threshold.
std::vector<std::pair<int, int>> baseline_links(const std::vector<SpanRepresentation>& reps,
                                                const ModelParams& params,
                                                const PipelineConfig& cfg) {
  std::vector<std::pair<int, int>> links;
  int count = int(reps.size());
  if (count < 2) return links;
  Eigen::VectorXd h = params.critic.initial_hidden();
  for (int i = 1; i < count; ++i) {
    int j_lo = std::max(0, i - cfg.max_antecedents);
    int best_j = -1;
    double best_score = cfg.pair_threshold;
    for (int j = j_lo; j < i; ++j) {
      EnvState s;
      s.i = i;
      s.j = j;
      Eigen::VectorXd x = state_features(s, reps, params.features);
      GruStepCache cache;
      double score = rnn_step(params.critic, x, h, &cache)[0];
      h = cache.h;
      if (score > best_score) {
        best_score = score;
        best_j = j;
      }
    }
    if (best_j >= 0) links.push_back({i, best_j});
  }
  return links;
}

}  // namespace

DocumentResult resolve_document(const Document& doc, const EmbeddingTable& emb,
                                const ModelParams& params, const PipelineConfig& cfg,
                                const Lexicons& lex, PolicyMode mode) {
  DocumentResult result;
  bool need_targets = mode == PolicyMode::GoldOracle;
  CandidateSet cand = build_candidates(doc, emb, params, cfg, need_targets);
  result.candidates = cand.candidates;
  std::vector<Span> spans = cand.candidate_spans();

  if (cfg.use_rules && cfg.rule_mask().any()) {
    result.rule_partition = apply_rules(doc, spans, lex, cfg.rule_mask(), &result.rule_links);
  } else {
    result.rule_partition.non_linked = spans;
  }

  if (cfg.use_ac && spans.size() >= 2) {
    RewardParams rp = RewardParams::from_model(params, cfg.decay_gamma);
    switch (mode) {
      case PolicyMode::Greedy: {
        ActorPolicy policy(params.actor, /*sample=*/false, Rng(cfg.seed));
        result.episode = rollout(cand.candidates, policy, rp, params.features);
        break;
      }
      case PolicyMode::GoldOracle: {
        GoldOraclePolicy policy(cand.targets);
        result.episode = rollout(cand.candidates, policy, rp, params.features);
        break;
      }
      case PolicyMode::Baseline: {
        result.episode.stored_links = baseline_links(cand.candidates, params, cfg);
        break;
      }
    }
    result.ac_clusters = links_to_clusters(result.episode.stored_links, spans);
  }

  result.final_clusters = reunion(result.ac_clusters, result.rule_partition);
  return result;
}

std::vector<DocumentResult> resolve_corpus(const std::vector<const Document*>& docs,
                                           const std::vector<const EmbeddingTable*>& embeddings,
                                           const ModelParams& params, const PipelineConfig& cfg,
                                           const Lexicons& lex, PolicyMode mode) {
  if (docs.size() != embeddings.size())
    throw ContractViolation("document and embedding lists must align");
  std::vector<DocumentResult> results(docs.size());
  parallel_for(int(docs.size()), cfg.jobs, [&](int i) {
    results[size_t(i)] =
        resolve_document(*docs[size_t(i)], *embeddings[size_t(i)], params, cfg, lex, mode);
  });
  return results;
}

std::string inspect_report(const Document& doc, const DocumentResult& result) {
  std::ostringstream out;
  out << "document " << doc.doc_id << ": " << doc.tokens.size() << " tokens, "
      << doc.sentences.size() << " sentences\n";

  out << "candidates (" << result.candidates.size() << "):\n";
  for (size_t i = 0; i < result.candidates.size(); ++i) {
    const auto& rep = result.candidates[i];
    out << "  [" << i << "] (" << rep.span.start << "," << rep.span.end << ") \""
        << doc.text_of(rep.span) << "\" p=" << rep.mention_prob << "\n";
  }

  out << "rule links (" << result.rule_links.size() << "):\n";
  for (const RuleLink& link : result.rule_links) {
    out << "  " << rule_name(link.rule_id) << " (" << link.mention_a.start << ","
        << link.mention_a.end << ") \"" << doc.text_of(link.mention_a) << "\" <- ("
        << link.mention_b.start << "," << link.mention_b.end << ") \""
        << doc.text_of(link.mention_b) << "\"\n";
  }

  out << "episode (" << result.episode.steps.size() << " steps):\n";
  for (size_t t = 0; t < result.episode.steps.size(); ++t) {
    const EpisodeStep& st = result.episode.steps[t];
    out << "  t=" << t << " (i=" << st.state.i << ",j=" << st.state.j << ") "
        << action_name(st.action) << " r=" << st.reward << "\n";
  }
  out << "stored links:";
  for (const auto& [i, j] : result.episode.stored_links) out << " (" << i << "," << j << ")";
  out << "\n";

  out << "final clusters (" << result.final_clusters.size() << "):\n";
  for (size_t c = 0; c < result.final_clusters.clusters.size(); ++c) {
    out << "  " << provenance_name(result.final_clusters.provenance[c]) << " {";
    bool first = true;
    for (const Span& s : result.final_clusters.clusters[c]) {
      if (!first) out << ", ";
      first = false;
      out << "(" << s.start << "," << s.end << ") \"" << doc.text_of(s) << "\"";
    }
    out << "}\n";
  }
  return out.str();
}

Clustering document_clustering(const Document& doc) {
  Clustering clusters;
  for (const GoldCluster& c : doc.gold_clusters) clusters.push_back(c.spans);
  return clusters;
}

CorpusScore score_corpora(const std::vector<Document>& gold_docs,
                          const std::vector<Document>& system_docs) {
  std::map<std::string, const Document*> system_by_id;
  for (const Document& d : system_docs) {
    if (!system_by_id.emplace(d.doc_id, &d).second)
      throw DataError("system corpus repeats document '" + d.doc_id + "'");
  }

  MetricCounts muc_total, b3_total, ceaf_total;
  for (const Document& gold : gold_docs) {
    auto it = system_by_id.find(gold.doc_id);
    if (it == system_by_id.end())
      throw DataError("system corpus is missing document '" + gold.doc_id + "'");
    Clustering gold_clusters = document_clustering(gold);
    Clustering system_clusters = document_clustering(*it->second);
    muc_total += muc_counts(system_clusters, gold_clusters);
    b3_total += b_cubed_counts(system_clusters, gold_clusters);
    ceaf_total += ceaf_phi4_counts(system_clusters, gold_clusters);
    system_by_id.erase(it);
  }
  if (!system_by_id.empty())
    throw DataError("system corpus has document '" + system_by_id.begin()->first +
                    "' absent from gold");

  CorpusScore score;
  score.muc = triple_from_counts(muc_total);
  score.b_cubed = triple_from_counts(b3_total);
  score.ceaf_phi4 = triple_from_counts(ceaf_total);
  score.avg_f1 = average_f1({score.muc, score.b_cubed, score.ceaf_phi4});
  return score;
}

CorpusScore score_results(const std::vector<const Document*>& docs,
                          const std::vector<DocumentResult>& results) {
  if (docs.size() != results.size())
    throw ContractViolation("docs/results must align");
  MetricCounts muc_total, b3_total, ceaf_total;
  for (size_t i = 0; i < docs.size(); ++i) {
    Clustering gold = document_clustering(*docs[i]);
    const Clustering& system = results[i].final_clusters.clusters;
    muc_total += muc_counts(system, gold);
    b3_total += b_cubed_counts(system, gold);
    ceaf_total += ceaf_phi4_counts(system, gold);
  }
  CorpusScore score;
  score.muc = triple_from_counts(muc_total);
  score.b_cubed = triple_from_counts(b3_total);
  score.ceaf_phi4 = triple_from_counts(ceaf_total);
  score.avg_f1 = average_f1({score.muc, score.b_cubed, score.ceaf_phi4});
  return score;
}

std::map<std::string, const EmbeddingTable*> index_embeddings(
    const std::vector<EmbeddingTable>& tables) {
  std::map<std::string, const EmbeddingTable*> index;
  for (const EmbeddingTable& t : tables) {
    if (!index.emplace(t.doc_id, &t).second)
      throw DataError("embedding file repeats document '" + t.doc_id + "'");
  }
  return index;
}

const EmbeddingTable& embeddings_for(const Document& doc,
                                     const std::map<std::string, const EmbeddingTable*>& index) {
  auto it = index.find(doc.doc_id);
  if (it == index.end())
    throw DataError("no embeddings for document '" + doc.doc_id + "'");
  const EmbeddingTable& table = *it->second;
  if (table.tokens() != int(doc.tokens.size()))
    throw DataError(doc.doc_id + ": alignment error: " + std::to_string(table.tokens()) +
                    " vectors for " + std::to_string(doc.tokens.size()) + " tokens");
  return table;
}

std::vector<Document> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  auto docs = parse_corpus(in);
  if (docs.empty()) throw ParseError("no document found in '" + path + "'");
  return docs;
}

std::vector<EmbeddingTable> read_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  return load_embedding_file(in);
}

}  // namespace hrnacc
