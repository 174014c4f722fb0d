#ifndef HRNACC_MODEL_HPP
#define HRNACC_MODEL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hrnacc/nets.hpp"
#include "hrnacc/spans.hpp"

namespace hrnacc {

struct ModelDims {
  int emb_dim = 0;
  int max_span_width = 10;
  int feature_dim = 20;
  int ffn_hidden = 150;
  int fnn_output_dim = 150;  // k, the f3 output consumed by v_bi
  int rnn_hidden = 200;
  double dropout = 0.5;

  int span_dim() const { return span_vector_dim(emb_dim, feature_dim); }
  int pair_dim() const { return 3 * span_dim(); }
  int state_dim() const { return 2 * span_dim() + feature_dim; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Every learnable tensor: attention projection, feature tables, the reward
// networks with their linear heads, and the recurrent actor and critic.
struct ModelParams {
  ModelDims dims;
  AttentionParams attention;
  SpanFeatureEmbeddings features;
  FeedForwardNet f1;  // span -> 1, mention head
  FeedForwardNet f2;  // pair -> 1, compatibility head
  FeedForwardNet f3;  // span -> k, antecedent-existence features
  Eigen::VectorXd v_m;
  Eigen::VectorXd v_bi;
  RecurrentNet actor;   // state -> 3 action logits
  RecurrentNet critic;  // state -> value

  static ModelParams init(const ModelDims& dims, std::uint64_t seed, double v_m_init = 1.0);

  std::vector<TensorRef> tensor_refs();
  std::vector<TensorRef> fnn_refs();        // f1, f2, f3, v_bi
  std::vector<TensorRef> ac_refs();         // actor, critic, distance features
  std::vector<TensorRef> detection_refs();  // f1, attention projection, width features
};

// Named-tensor archive: magic, version, embedded config text, then per
// tensor name/shape and little-endian 32-bit floats. Round-trips bit-exact.
void save_checkpoint(std::ostream& out, ModelParams& params, const std::string& config_text);
// Loads into a params struct already shaped per its config; returns the
// embedded config text. Shape mismatch raises ConfigError.
std::string load_checkpoint(std::istream& in, ModelParams& params);
// Reads only the embedded config text.
std::string read_checkpoint_config(std::istream& in);

}  // namespace hrnacc

#endif  // HRNACC_MODEL_HPP
