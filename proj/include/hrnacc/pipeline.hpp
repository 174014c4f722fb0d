#ifndef HRNACC_PIPELINE_HPP
#define HRNACC_PIPELINE_HPP

#include <map>
#include <string>
#include <vector>

#include "hrnacc/config.hpp"
#include "hrnacc/metrics.hpp"
#include "hrnacc/rules.hpp"
#include "hrnacc/train.hpp"

namespace hrnacc {

enum class PolicyMode { Greedy, Baseline, GoldOracle };

// Everything one document produced on its way through the pipeline; kept
// for inspection and testing.
struct DocumentResult {
  std::vector<SpanRepresentation> candidates;
  GroupPartition rule_partition;
  std::vector<RuleLink> rule_links;
  Episode episode;
  ClusterSet ac_clusters;
  ClusterSet final_clusters;
};

// span model -> rules -> (greedy | baseline | oracle) clustering -> reunion.
DocumentResult resolve_document(const Document& doc, const EmbeddingTable& emb,
                                const ModelParams& params, const PipelineConfig& cfg,
                                const Lexicons& lex, PolicyMode mode);

std::vector<DocumentResult> resolve_corpus(const std::vector<const Document*>& docs,
                                           const std::vector<const EmbeddingTable*>& embeddings,
                                           const ModelParams& params, const PipelineConfig& cfg,
                                           const Lexicons& lex, PolicyMode mode);

// Human-readable trace: candidates with scores, rule links, the episode's
// action sequence, and final clusters with provenance.
std::string inspect_report(const Document& doc, const DocumentResult& result);

struct CorpusScore {
  ScoreTriple muc;
  ScoreTriple b_cubed;
  ScoreTriple ceaf_phi4;
  double avg_f1 = 0.0;
};

Clustering document_clustering(const Document& doc);

// Aggregates per-document counts, then derives corpus P/R/F1. Documents are
// matched by doc_id; both corpora must cover the same ids.
CorpusScore score_corpora(const std::vector<Document>& gold_docs,
                          const std::vector<Document>& system_docs);

CorpusScore score_results(const std::vector<const Document*>& docs,
                          const std::vector<DocumentResult>& results);

// doc_id keyed table lookup with alignment checks.
std::map<std::string, const EmbeddingTable*> index_embeddings(
    const std::vector<EmbeddingTable>& tables);
const EmbeddingTable& embeddings_for(const Document& doc,
                                     const std::map<std::string, const EmbeddingTable*>& index);

std::vector<Document> read_corpus_file(const std::string& path);
std::vector<EmbeddingTable> read_embedding_file(const std::string& path);

}  // namespace hrnacc

#endif  // HRNACC_PIPELINE_HPP
