#include "hrnacc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hrnacc {

namespace {

long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("config key '" + key + "' needs a boolean, got '" + value + "'");
}

std::string format_real(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "max_span_width") max_span_width = int(parse_int(key, value));
  else if (key == "mention_ratio") mention_ratio = parse_real(key, value);
  else if (key == "mention_cap") mention_cap = int(parse_int(key, value));
  else if (key == "feature_dim") feature_dim = int(parse_int(key, value));
  else if (key == "ffn_hidden") ffn_hidden = int(parse_int(key, value));
  else if (key == "fnn_output_dim") fnn_output_dim = int(parse_int(key, value));
  else if (key == "rnn_hidden") rnn_hidden = int(parse_int(key, value));
  else if (key == "dropout") dropout = parse_real(key, value);
  else if (key == "decay_gamma") decay_gamma = parse_real(key, value);
  else if (key == "v_m_init") v_m_init = parse_real(key, value);
  else if (key == "max_antecedents") max_antecedents = int(parse_int(key, value));
  else if (key == "discount_gamma") discount_gamma = parse_real(key, value);
  else if (key == "lr") lr = parse_real(key, value);
  else if (key == "adam_beta1") adam_beta1 = parse_real(key, value);
  else if (key == "adam_beta2") adam_beta2 = parse_real(key, value);
  else if (key == "epochs") epochs = int(parse_int(key, value));
  else if (key == "batch_size") batch_size = int(parse_int(key, value));
  else if (key == "seed") seed = std::uint64_t(parse_int(key, value));
  else if (key == "detect_weight_actor") detect_weight_actor = parse_real(key, value);
  else if (key == "detect_weight_critic") detect_weight_critic = parse_real(key, value);
  else if (key == "entropy_coef") entropy_coef = parse_real(key, value);
  else if (key == "advantage_norm") advantage_norm = parse_bool(key, value);
  else if (key == "pair_threshold") pair_threshold = parse_real(key, value);
  else if (key == "use_rules") use_rules = parse_bool(key, value);
  else if (key == "use_ac") use_ac = parse_bool(key, value);
  else if (key == "use_detect_loss") use_detect_loss = parse_bool(key, value);
  else if (key == "rules") rules = value;
  else if (key == "mode") {
    if (value != "hrnacc" && value != "baseline")
      throw ConfigError("config key 'mode' must be hrnacc or baseline, got '" + value + "'");
    mode = value;
  }
  else if (key == "jobs") jobs = int(parse_int(key, value));
  else if (key == "emb_dim") emb_dim = int(parse_int(key, value));
  else throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig PipelineConfig::from_stream(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_string(const std::string& text) {
  std::istringstream in(text);
  return from_stream(in);
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  return from_stream(in);
}

std::string PipelineConfig::to_string() const {
  std::ostringstream out;
  out << "adam_beta1=" << format_real(adam_beta1) << "\n";
  out << "adam_beta2=" << format_real(adam_beta2) << "\n";
  out << "advantage_norm=" << (advantage_norm ? 1 : 0) << "\n";
  out << "batch_size=" << batch_size << "\n";
  out << "decay_gamma=" << format_real(decay_gamma) << "\n";
  out << "detect_weight_actor=" << format_real(detect_weight_actor) << "\n";
  out << "detect_weight_critic=" << format_real(detect_weight_critic) << "\n";
  out << "discount_gamma=" << format_real(discount_gamma) << "\n";
  out << "dropout=" << format_real(dropout) << "\n";
  out << "emb_dim=" << emb_dim << "\n";
  out << "entropy_coef=" << format_real(entropy_coef) << "\n";
  out << "epochs=" << epochs << "\n";
  out << "feature_dim=" << feature_dim << "\n";
  out << "ffn_hidden=" << ffn_hidden << "\n";
  out << "fnn_output_dim=" << fnn_output_dim << "\n";
  out << "jobs=" << jobs << "\n";
  out << "lr=" << format_real(lr) << "\n";
  out << "max_antecedents=" << max_antecedents << "\n";
  out << "max_span_width=" << max_span_width << "\n";
  out << "mention_cap=" << mention_cap << "\n";
  out << "mention_ratio=" << format_real(mention_ratio) << "\n";
  out << "mode=" << mode << "\n";
  out << "pair_threshold=" << format_real(pair_threshold) << "\n";
  out << "rnn_hidden=" << rnn_hidden << "\n";
  out << "rules=" << rules << "\n";
  out << "seed=" << seed << "\n";
  out << "use_ac=" << (use_ac ? 1 : 0) << "\n";
  out << "use_detect_loss=" << (use_detect_loss ? 1 : 0) << "\n";
  out << "use_rules=" << (use_rules ? 1 : 0) << "\n";
  out << "v_m_init=" << format_real(v_m_init) << "\n";
  return out.str();
}

void PipelineConfig::validate() const {
  if (max_span_width < 1) throw ConfigError("max_span_width must be >= 1");
  if (mention_cap < 1) throw ConfigError("mention_cap must be >= 1");
  if (!(mention_ratio > 0.0)) throw ConfigError("mention_ratio must be > 0");
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (ffn_hidden < 1 || fnn_output_dim < 1 || rnn_hidden < 1)
    throw ConfigError("network sizes must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
  if (!(decay_gamma > 0.0 && decay_gamma < 1.0))
    throw ConfigError("decay_gamma must lie in (0,1)");
  if (!(discount_gamma >= 0.0 && discount_gamma < 1.0))
    throw ConfigError("discount_gamma must lie in [0,1)");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_antecedents < 1) throw ConfigError("max_antecedents must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  RuleMask::parse(rules);  // throws on malformed ids
}

ModelDims PipelineConfig::model_dims() const {
  ModelDims dims;
  dims.emb_dim = emb_dim;
  dims.max_span_width = max_span_width;
  dims.feature_dim = feature_dim;
  dims.ffn_hidden = ffn_hidden;
  dims.fnn_output_dim = fnn_output_dim;
  dims.rnn_hidden = rnn_hidden;
  dims.dropout = dropout;
  return dims;
}

RuleMask PipelineConfig::rule_mask() const {
  return use_rules ? RuleMask::parse(rules) : RuleMask::none();
}

int PipelineConfig::top_k(int token_count) const {
  int k = int(std::ceil(mention_ratio * double(token_count)));
  return std::max(1, std::min(mention_cap, k));
}

}  // namespace hrnacc
