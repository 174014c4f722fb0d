#include "hrnacc/spans.hpp"

#include <algorithm>
#include <cmath>

namespace hrnacc {

AttentionParams AttentionParams::zeros(int emb_dim) {
  return {Eigen::VectorXd::Zero(emb_dim)};
}

AttentionParams AttentionParams::glorot(int emb_dim, Rng& rng) {
  double limit = std::sqrt(6.0 / double(emb_dim + 1));
  Eigen::VectorXd v(emb_dim);
  for (int i = 0; i < emb_dim; ++i) v[i] = rng.uniform(-limit, limit);
  return {std::move(v)};
}

SpanFeatureEmbeddings SpanFeatureEmbeddings::zeros(int max_span_width, int feature_dim) {
  SpanFeatureEmbeddings f;
  f.width_embeddings = Eigen::MatrixXd::Zero(max_span_width, feature_dim);
  f.distance_embeddings = Eigen::MatrixXd::Zero(kDistanceBuckets, feature_dim);
  f.genre_embeddings = Eigen::MatrixXd::Zero(kGenreBuckets, feature_dim);
  f.speaker_embeddings = Eigen::MatrixXd::Zero(kSpeakerBuckets, feature_dim);
  return f;
}

SpanFeatureEmbeddings SpanFeatureEmbeddings::glorot(int max_span_width, int feature_dim,
                                                    Rng& rng) {
  SpanFeatureEmbeddings f = zeros(max_span_width, feature_dim);
  auto fill = [&](Eigen::MatrixXd& m) {
    double limit = std::sqrt(6.0 / double(m.rows() + m.cols()));
    for (long c = 0; c < m.cols(); ++c)
      for (long r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
  };
  fill(f.width_embeddings);
  fill(f.distance_embeddings);
  fill(f.genre_embeddings);
  fill(f.speaker_embeddings);
  return f;
}

int distance_bucket(int distance) {
  if (distance < 0) throw ContractViolation("negative mention distance");
  if (distance <= 4) return std::max(distance, 1) - 1;  // 1,2,3,4 -> 0..3
  if (distance <= 7) return 4;
  if (distance <= 15) return 5;
  if (distance <= 31) return 6;
  if (distance <= 63) return 7;
  return 8;
}

std::vector<Span> enumerate_spans(const Document& doc, int max_width) {
  if (max_width < 1) throw ConfigError("max_width must be >= 1");
  std::vector<Span> spans;
  for (const Span& sent : doc.sentences) {
    for (int start = sent.start; start <= sent.end; ++start) {
      int limit = std::min(sent.end, start + max_width - 1);
      for (int end = start; end <= limit; ++end) spans.push_back({start, end});
    }
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

namespace {

void check_span(Span span, const EmbeddingTable& emb) {
  if (span.start < 0 || span.end >= emb.tokens() || span.start > span.end)
    throw ContractViolation("span (" + std::to_string(span.start) + "," +
                            std::to_string(span.end) + ") outside embedding table");
}

int width_bucket(Span span, const SpanFeatureEmbeddings& feats) {
  return std::min(span.width(), feats.max_width()) - 1;
}

}  // namespace

Eigen::VectorXd head_attention_weights(Span span, const EmbeddingTable& emb,
                                       const AttentionParams& params) {
  check_span(span, emb);
  if (params.v_o.size() != emb.dim)
    throw ConfigError("attention projection dim " + std::to_string(params.v_o.size()) +
                      " does not match embedding dim " + std::to_string(emb.dim));
  int w = span.width();
  Eigen::VectorXd scores(w);
  for (int t = 0; t < w; ++t)
    scores[t] = params.v_o.dot(emb.token_vector(span.start + t));
  double max_score = scores.maxCoeff();
  Eigen::VectorXd alphas = (scores.array() - max_score).exp();
  alphas /= alphas.sum();
  return alphas;
}

Eigen::VectorXd head_attention(Span span, const EmbeddingTable& emb,
                               const AttentionParams& params) {
  Eigen::VectorXd alphas = head_attention_weights(span, emb, params);
  Eigen::VectorXd head = Eigen::VectorXd::Zero(emb.dim);
  for (int t = 0; t < span.width(); ++t)
    head += alphas[t] * emb.token_vector(span.start + t);
  return head;
}

int span_vector_dim(int emb_dim, int feature_dim) { return 3 * emb_dim + feature_dim; }

SpanRepresentation span_representation(Span span, const EmbeddingTable& emb,
                                       const AttentionParams& params,
                                       const SpanFeatureEmbeddings& feats) {
  check_span(span, emb);
  int d = emb.dim;
  int fd = feats.feature_dim();
  SpanRepresentation rep;
  rep.span = span;
  rep.vector.resize(span_vector_dim(d, fd));
  rep.vector.segment(0, d) = emb.token_vector(span.start);
  rep.vector.segment(d, d) = emb.token_vector(span.end);
  rep.vector.segment(2 * d, d) = head_attention(span, emb, params);
  rep.vector.segment(3 * d, fd) = feats.width_embeddings.row(width_bucket(span, feats));
  return rep;
}

double mention_score(const SpanRepresentation& rep, const FeedForwardNet& detector) {
  if (detector.out_dim() != 1)
    throw ConfigError("mention detector must have scalar output");
  Eigen::VectorXd z = ffn_forward(detector, rep.vector, /*training=*/false);
  return sigmoid(z[0]);
}

SpanRepGrads span_representation_backward(Span span, const EmbeddingTable& emb,
                                          const AttentionParams& params,
                                          const SpanFeatureEmbeddings& feats,
                                          const Eigen::VectorXd& rep_grad) {
  check_span(span, emb);
  int d = emb.dim;
  int fd = feats.feature_dim();
  if (rep_grad.size() != span_vector_dim(d, fd))
    throw ContractViolation("rep_grad has wrong dimension");

  SpanRepGrads g;
  g.width_bucket = width_bucket(span, feats);
  g.width_row = rep_grad.segment(3 * d, fd);

  // Head segment: w = sum_t alpha_t e_t with alpha = softmax(v_o . e_t).
  // d alpha_t / d o_k = alpha_t (delta_tk - alpha_k), so with c_t = g.e_t:
  // dL/do_t = alpha_t (c_t - sum_k alpha_k c_k) and dL/dv_o = sum_t dL/do_t e_t.
  Eigen::VectorXd gw = rep_grad.segment(2 * d, d);
  Eigen::VectorXd alphas = head_attention_weights(span, emb, params);
  int w = span.width();
  Eigen::VectorXd c(w);
  for (int t = 0; t < w; ++t) c[t] = gw.dot(emb.token_vector(span.start + t));
  double cbar = alphas.dot(c);
  g.v_o = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < w; ++t)
    g.v_o += alphas[t] * (c[t] - cbar) * emb.token_vector(span.start + t);
  return g;
}

std::vector<SpanRepresentation> top_k_mentions(const std::vector<SpanRepresentation>& scored,
                                               int k) {
  if (k < 1) throw ConfigError("top_k_mentions needs K >= 1");
  std::vector<int> order(scored.size());
  for (size_t i = 0; i < order.size(); ++i) order[int(i)] = int(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scored[size_t(a)].mention_prob != scored[size_t(b)].mention_prob)
      return scored[size_t(a)].mention_prob > scored[size_t(b)].mention_prob;
    return scored[size_t(a)].span < scored[size_t(b)].span;
  });
  order.resize(std::min<size_t>(order.size(), size_t(k)));
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scored[size_t(a)].span < scored[size_t(b)].span; });
  std::vector<SpanRepresentation> out;
  out.reserve(order.size());
  for (int idx : order) out.push_back(scored[size_t(idx)]);
  return out;
}

}  // namespace hrnacc
