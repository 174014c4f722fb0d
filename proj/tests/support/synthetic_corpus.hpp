#ifndef HRNACC_TESTS_SYNTHETIC_CORPUS_HPP
#define HRNACC_TESTS_SYNTHETIC_CORPUS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hrnacc/corpus.hpp"

namespace hrnacc::testsupport {

// Templated corpus of venue and person entities. Mention forms are chosen
// so that some links are reachable by the deterministic rules (exact
// repeats, inclusion variants, relaxed variants, first-person dialogue)
// while others share only a distinctive token and need the learned
// clustering (type-variant venues, honorifics, third-person pronouns).
struct SyntheticConfig {
  int n_docs = 200;
  std::uint64_t seed = 7;
  int entities_lo = 2;
  int entities_hi = 3;
  int extra_mentions_lo = 1;
  int extra_mentions_hi = 2;
  double person_prob = 0.4;
  double dialogue_prob = 0.6;
  double copular_prob = 0.15;
  // Restrict every variant to rule-reachable forms.
  bool rule_trivial = false;
  // Larger filler vocabulary and randomized sentence layout, so the same
  // mentions appear in many different contexts.
  bool context_shuffle = false;
  std::string doc_prefix = "synth";
};

std::vector<Document> generate_corpus(const SyntheticConfig& cfg);

std::vector<EmbeddingTable> corpus_embeddings(const std::vector<Document>& docs, int dim,
                                              std::uint64_t seed);

}  // namespace hrnacc::testsupport

#endif  // HRNACC_TESTS_SYNTHETIC_CORPUS_HPP
