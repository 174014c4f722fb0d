#ifndef HRNACC_CONFIG_HPP
#define HRNACC_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hrnacc/model.hpp"
#include "hrnacc/rules.hpp"

namespace hrnacc {

// Every tunable in one place, loaded from a key=value file with CLI
// overrides. Unknown keys are rejected; the effective config is echoed into
// every output artifact header.
struct PipelineConfig {
  // span model
  int max_span_width = 10;
  double mention_ratio = 0.4;
  int mention_cap = 250;
  int feature_dim = 20;
  // networks
  int ffn_hidden = 150;
  int fnn_output_dim = 150;
  int rnn_hidden = 200;
  double dropout = 0.5;
  // reward
  double decay_gamma = 0.5;
  double v_m_init = 1.0;
  int max_antecedents = 250;
  // training
  double discount_gamma = 0.9;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 42;
  double detect_weight_actor = 1.0;
  double detect_weight_critic = 1.0;
  double entropy_coef = 0.0;
  bool advantage_norm = false;
  double pair_threshold = 0.0;  // supervised-baseline inference threshold
  // pipeline
  bool use_rules = true;
  bool use_ac = true;
  bool use_detect_loss = true;
  std::string rules = "1,2,3,4";
  std::string mode = "hrnacc";  // or "baseline"
  int jobs = 1;
  // derived from data; persisted so checkpoints know their shapes
  int emb_dim = 0;

  void set(const std::string& key, const std::string& value);
  static PipelineConfig from_stream(std::istream& in);
  static PipelineConfig from_string(const std::string& text);
  static PipelineConfig from_file(const std::string& path);
  // Canonical key=value lines, one per key.
  std::string to_string() const;

  void validate() const;
  ModelDims model_dims() const;
  RuleMask rule_mask() const;
  int top_k(int token_count) const;
};

}  // namespace hrnacc

#endif  // HRNACC_CONFIG_HPP
