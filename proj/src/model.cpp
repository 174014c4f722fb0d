#include "hrnacc/model.hpp"

#include <cstring>
#include <istream>
#include <ostream>

namespace hrnacc {

ModelParams ModelParams::init(const ModelDims& dims, std::uint64_t seed, double v_m_init) {
  if (dims.emb_dim < 1) throw ConfigError("model init needs emb_dim >= 1");
  ModelParams p;
  p.dims = dims;
  Rng rng(hash_mix(seed, 0x6d6f64656cULL));
  p.attention = AttentionParams::glorot(dims.emb_dim, rng);
  p.features = SpanFeatureEmbeddings::glorot(dims.max_span_width, dims.feature_dim, rng);
  p.f1 = FeedForwardNet::glorot(dims.span_dim(), dims.ffn_hidden, 1, dims.dropout, rng);
  p.f2 = FeedForwardNet::glorot(dims.pair_dim(), dims.ffn_hidden, 1, dims.dropout, rng);
  p.f3 = FeedForwardNet::glorot(dims.span_dim(), dims.ffn_hidden, dims.fnn_output_dim,
                                dims.dropout, rng);
  p.v_m = Eigen::VectorXd::Constant(1, v_m_init);
  p.v_bi = Eigen::VectorXd::Zero(dims.fnn_output_dim);
  {
    double limit = std::sqrt(6.0 / double(dims.fnn_output_dim + 1));
    for (int i = 0; i < dims.fnn_output_dim; ++i) p.v_bi[i] = rng.uniform(-limit, limit);
  }
  p.actor = RecurrentNet::glorot(dims.state_dim(), dims.rnn_hidden, 3, rng);
  p.critic = RecurrentNet::glorot(dims.state_dim(), dims.rnn_hidden, 1, rng);
  return p;
}

std::vector<TensorRef> ModelParams::tensor_refs() {
  std::vector<TensorRef> refs;
  refs.push_back({"attention.v_o", attention.v_o.data(), attention.v_o.size(), 1});
  refs.push_back({"features.width", features.width_embeddings.data(),
                  features.width_embeddings.rows(), features.width_embeddings.cols()});
  refs.push_back({"features.distance", features.distance_embeddings.data(),
                  features.distance_embeddings.rows(), features.distance_embeddings.cols()});
  refs.push_back({"features.genre", features.genre_embeddings.data(),
                  features.genre_embeddings.rows(), features.genre_embeddings.cols()});
  refs.push_back({"features.speaker", features.speaker_embeddings.data(),
                  features.speaker_embeddings.rows(), features.speaker_embeddings.cols()});
  for (auto& r : hrnacc::tensor_refs(f1, "f1")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(f2, "f2")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(f3, "f3")) refs.push_back(r);
  refs.push_back({"v_m", v_m.data(), v_m.size(), 1});
  refs.push_back({"v_bi", v_bi.data(), v_bi.size(), 1});
  for (auto& r : hrnacc::tensor_refs(actor, "actor")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(critic, "critic")) refs.push_back(r);
  return refs;
}

std::vector<TensorRef> ModelParams::fnn_refs() {
  std::vector<TensorRef> refs;
  for (auto& r : hrnacc::tensor_refs(f1, "f1")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(f2, "f2")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(f3, "f3")) refs.push_back(r);
  refs.push_back({"v_bi", v_bi.data(), v_bi.size(), 1});
  return refs;
}

std::vector<TensorRef> ModelParams::ac_refs() {
  std::vector<TensorRef> refs;
  for (auto& r : hrnacc::tensor_refs(actor, "actor")) refs.push_back(r);
  for (auto& r : hrnacc::tensor_refs(critic, "critic")) refs.push_back(r);
  refs.push_back({"features.distance", features.distance_embeddings.data(),
                  features.distance_embeddings.rows(), features.distance_embeddings.cols()});
  return refs;
}

std::vector<TensorRef> ModelParams::detection_refs() {
  std::vector<TensorRef> refs;
  for (auto& r : hrnacc::tensor_refs(f1, "f1")) refs.push_back(r);
  refs.push_back({"attention.v_o", attention.v_o.data(), attention.v_o.size(), 1});
  refs.push_back({"features.width", features.width_embeddings.data(),
                  features.width_embeddings.rows(), features.width_embeddings.cols()});
  return refs;
}

namespace {

constexpr char kMagic[8] = {'H', 'R', 'N', 'A', 'C', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("truncated checkpoint");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void write_f32(std::ostream& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

float read_f32(std::istream& in) {
  char b[4];
  in.read(b, 4);
  if (!in) throw DataError("truncated checkpoint");
  float v;
  std::memcpy(&v, b, 4);
  return v;
}

}  // namespace

void save_checkpoint(std::ostream& out, ModelParams& params, const std::string& config_text) {
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u32(out, std::uint32_t(config_text.size()));
  out.write(config_text.data(), long(config_text.size()));
  auto refs = params.tensor_refs();
  write_u32(out, std::uint32_t(refs.size()));
  for (const TensorRef& ref : refs) {
    write_u32(out, std::uint32_t(ref.name.size()));
    out.write(ref.name.data(), long(ref.name.size()));
    write_u32(out, std::uint32_t(ref.rows));
    write_u32(out, std::uint32_t(ref.cols));
    for (long i = 0; i < ref.size(); ++i) write_f32(out, float(ref.data[i]));
  }
}

namespace {

std::string read_header(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("not a model checkpoint (bad magic)");
  std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kVersion) + ")");
  std::uint32_t config_len = read_u32(in);
  std::string config(config_len, '\0');
  in.read(config.data(), long(config_len));
  if (!in) throw DataError("truncated checkpoint");
  return config;
}

}  // namespace

std::string read_checkpoint_config(std::istream& in) { return read_header(in); }

std::string load_checkpoint(std::istream& in, ModelParams& params) {
  std::string config = read_header(in);
  std::uint32_t count = read_u32(in);

  auto refs = params.tensor_refs();
  if (count != refs.size())
    throw ConfigError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                      std::to_string(refs.size()));
  for (std::uint32_t t = 0; t < count; ++t) {
    std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), long(name_len));
    if (!in) throw DataError("truncated checkpoint");
    std::uint32_t rows = read_u32(in);
    std::uint32_t cols = read_u32(in);
    const TensorRef& ref = refs[t];
    if (name != ref.name)
      throw ConfigError("checkpoint tensor '" + name + "' where '" + ref.name + "' expected");
    if (long(rows) != ref.rows || long(cols) != ref.cols)
      throw ConfigError("checkpoint tensor '" + name + "' has shape " + std::to_string(rows) +
                        "x" + std::to_string(cols) + ", expected " + std::to_string(ref.rows) +
                        "x" + std::to_string(ref.cols));
    for (long i = 0; i < ref.size(); ++i) ref.data[i] = double(read_f32(in));
  }
  return config;
}

}  // namespace hrnacc
