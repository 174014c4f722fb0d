#ifndef HRNACC_SPANS_HPP
#define HRNACC_SPANS_HPP

#include <Eigen/Core>
#include <vector>

#include "hrnacc/corpus.hpp"
#include "hrnacc/nets.hpp"
#include "hrnacc/types.hpp"

namespace hrnacc {

// Scalar projection scoring each token for head-finding attention.
struct AttentionParams {
  Eigen::VectorXd v_o;

  static AttentionParams zeros(int emb_dim);
  static AttentionParams glorot(int emb_dim, Rng& rng);
};

// Learned feature tables, feature_dim columns each. Width feeds the span
// vector; distance feeds the policy state; genre/speaker are kept for
// downstream consumers.
struct SpanFeatureEmbeddings {
  Eigen::MatrixXd width_embeddings;     // max_span_width rows
  Eigen::MatrixXd distance_embeddings;  // distance buckets
  Eigen::MatrixXd genre_embeddings;
  Eigen::MatrixXd speaker_embeddings;

  int feature_dim() const { return int(width_embeddings.cols()); }
  int max_width() const { return int(width_embeddings.rows()); }

  static SpanFeatureEmbeddings zeros(int max_span_width, int feature_dim);
  static SpanFeatureEmbeddings glorot(int max_span_width, int feature_dim, Rng& rng);
};

// Buckets 1,2,3,4,5-7,8-15,16-31,32-63,64+.
int distance_bucket(int distance);
inline constexpr int kDistanceBuckets = 9;
inline constexpr int kGenreBuckets = 8;
inline constexpr int kSpeakerBuckets = 3;

struct SpanRepresentation {
  Span span;
  Eigen::VectorXd vector;  // boundary start, boundary end, head attention, width feature
  double mention_prob = 0.0;
};

// All spans of width <= max_width inside single sentences, ordered by
// (start, end).
std::vector<Span> enumerate_spans(const Document& doc, int max_width);

// Softmax attention weights over the span's tokens.
Eigen::VectorXd head_attention_weights(Span span, const EmbeddingTable& emb,
                                       const AttentionParams& params);
// Attention-weighted sum of the span's token embeddings.
Eigen::VectorXd head_attention(Span span, const EmbeddingTable& emb,
                               const AttentionParams& params);

SpanRepresentation span_representation(Span span, const EmbeddingTable& emb,
                                       const AttentionParams& params,
                                       const SpanFeatureEmbeddings& feats);

int span_vector_dim(int emb_dim, int feature_dim);

// sigmoid(detector(m)); the detector is the mention head trained on
// is-mention targets.
double mention_score(const SpanRepresentation& rep, const FeedForwardNet& detector);

// Gradients of a loss through one span representation back to the
// attention projection and the width feature row.
struct SpanRepGrads {
  Eigen::VectorXd v_o;
  Eigen::VectorXd width_row;  // gradient for width_embeddings.row(bucket)
  int width_bucket = 0;
};

SpanRepGrads span_representation_backward(Span span, const EmbeddingTable& emb,
                                          const AttentionParams& params,
                                          const SpanFeatureEmbeddings& feats,
                                          const Eigen::VectorXd& rep_grad);

// The K highest-probability spans; ties broken by (start, end); the result
// is re-sorted into document order.
std::vector<SpanRepresentation> top_k_mentions(const std::vector<SpanRepresentation>& scored,
                                               int k);

}  // namespace hrnacc

#endif  // HRNACC_SPANS_HPP
