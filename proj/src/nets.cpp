#include "hrnacc/nets.hpp"

#include <algorithm>
#include <cmath>

namespace hrnacc {

namespace {

Eigen::MatrixXd glorot_matrix(long rows, long cols, Rng& rng) {
  double limit = std::sqrt(6.0 / double(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (long c = 0; c < cols; ++c)
    for (long r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

Eigen::VectorXd dropout_mask(long n, double rate, Rng& rng) {
  Eigen::VectorXd mask(n);
  double keep = 1.0 - rate;
  for (long i = 0; i < n; ++i) mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

FeedForwardNet FeedForwardNet::zeros(int in, int hidden, int out, double dropout) {
  FeedForwardNet net;
  net.W1 = Eigen::MatrixXd::Zero(hidden, in);
  net.W2 = Eigen::MatrixXd::Zero(hidden, hidden);
  net.W3 = Eigen::MatrixXd::Zero(out, hidden);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.b2 = Eigen::VectorXd::Zero(hidden);
  net.b3 = Eigen::VectorXd::Zero(out);
  net.dropout_rate = dropout;
  return net;
}

FeedForwardNet FeedForwardNet::glorot(int in, int hidden, int out, double dropout, Rng& rng) {
  FeedForwardNet net = zeros(in, hidden, out, dropout);
  net.W1 = glorot_matrix(hidden, in, rng);
  net.W2 = glorot_matrix(hidden, hidden, rng);
  net.W3 = glorot_matrix(out, hidden, rng);
  return net;
}

Eigen::VectorXd ffn_forward(const FeedForwardNet& net, const Eigen::VectorXd& x, bool training,
                            Rng* rng, FfnCache* cache) {
  if (x.size() != net.in_dim())
    throw ConfigError("ffn input dim " + std::to_string(x.size()) + ", expected " +
                      std::to_string(net.in_dim()));
  if (!x.allFinite()) throw DataError("non-finite ffn input");
  if (training && net.dropout_rate > 0.0 && rng == nullptr)
    throw ContractViolation("training-mode ffn_forward needs an rng for dropout");

  Eigen::VectorXd z1 = net.W1 * x + net.b1;
  Eigen::VectorXd a1 = relu(z1);
  Eigen::VectorXd mask1, mask2;
  if (training && net.dropout_rate > 0.0) {
    mask1 = dropout_mask(a1.size(), net.dropout_rate, *rng);
    a1 = a1.cwiseProduct(mask1);
  }
  Eigen::VectorXd z2 = net.W2 * a1 + net.b2;
  Eigen::VectorXd a2 = relu(z2);
  if (training && net.dropout_rate > 0.0) {
    mask2 = dropout_mask(a2.size(), net.dropout_rate, *rng);
    a2 = a2.cwiseProduct(mask2);
  }
  Eigen::VectorXd y = net.W3 * a2 + net.b3;

  if (cache) {
    cache->x = x;
    cache->z1 = std::move(z1);
    cache->a1 = std::move(a1);
    cache->z2 = std::move(z2);
    cache->a2 = std::move(a2);
    cache->y = y;
    cache->mask1 = std::move(mask1);
    cache->mask2 = std::move(mask2);
    cache->training = training;
    cache->valid = true;
  }
  return y;
}

FfnGrads FfnGrads::zeros_like(const FeedForwardNet& net) {
  FfnGrads g;
  g.W1 = Eigen::MatrixXd::Zero(net.W1.rows(), net.W1.cols());
  g.W2 = Eigen::MatrixXd::Zero(net.W2.rows(), net.W2.cols());
  g.W3 = Eigen::MatrixXd::Zero(net.W3.rows(), net.W3.cols());
  g.b1 = Eigen::VectorXd::Zero(net.b1.size());
  g.b2 = Eigen::VectorXd::Zero(net.b2.size());
  g.b3 = Eigen::VectorXd::Zero(net.b3.size());
  g.input = Eigen::VectorXd::Zero(net.in_dim());
  return g;
}

void FfnGrads::accumulate(const FfnGrads& other) {
  W1 += other.W1;
  W2 += other.W2;
  W3 += other.W3;
  b1 += other.b1;
  b2 += other.b2;
  b3 += other.b3;
  input += other.input;
}

FfnGrads ffn_backward(const FeedForwardNet& net, const FfnCache& cache,
                      const Eigen::VectorXd& out_grad) {
  if (!cache.valid) throw ContractViolation("ffn_backward called with a stale cache");
  if (cache.x.size() != net.in_dim() || cache.a2.size() != net.hidden_dim())
    throw ContractViolation("ffn cache does not match network shape");
  if (out_grad.size() != net.out_dim())
    throw ConfigError("ffn out_grad dim " + std::to_string(out_grad.size()) + ", expected " +
                      std::to_string(net.out_dim()));

  FfnGrads g = FfnGrads::zeros_like(net);
  g.W3 = out_grad * cache.a2.transpose();
  g.b3 = out_grad;
  Eigen::VectorXd ga2 = net.W3.transpose() * out_grad;
  if (cache.training && cache.mask2.size()) ga2 = ga2.cwiseProduct(cache.mask2);
  Eigen::VectorXd gz2 = (cache.z2.array() > 0.0).select(ga2, 0.0);

  g.W2 = gz2 * cache.a1.transpose();
  g.b2 = gz2;
  Eigen::VectorXd ga1 = net.W2.transpose() * gz2;
  if (cache.training && cache.mask1.size()) ga1 = ga1.cwiseProduct(cache.mask1);
  Eigen::VectorXd gz1 = (cache.z1.array() > 0.0).select(ga1, 0.0);

  g.W1 = gz1 * cache.x.transpose();
  g.b1 = gz1;
  g.input = net.W1.transpose() * gz1;
  return g;
}

RecurrentNet RecurrentNet::zeros(int in, int hidden, int out) {
  RecurrentNet net;
  auto zm = [](long r, long c) { return Eigen::MatrixXd::Zero(r, c); };
  net.Wz = zm(hidden, in);
  net.Wr = zm(hidden, in);
  net.Wn = zm(hidden, in);
  net.Uz = zm(hidden, hidden);
  net.Ur = zm(hidden, hidden);
  net.Un = zm(hidden, hidden);
  net.bz = Eigen::VectorXd::Zero(hidden);
  net.br = Eigen::VectorXd::Zero(hidden);
  net.bn = Eigen::VectorXd::Zero(hidden);
  net.Wout = zm(out, hidden);
  net.bout = Eigen::VectorXd::Zero(out);
  return net;
}

RecurrentNet RecurrentNet::glorot(int in, int hidden, int out, Rng& rng) {
  RecurrentNet net = zeros(in, hidden, out);
  net.Wz = glorot_matrix(hidden, in, rng);
  net.Wr = glorot_matrix(hidden, in, rng);
  net.Wn = glorot_matrix(hidden, in, rng);
  net.Uz = glorot_matrix(hidden, hidden, rng);
  net.Ur = glorot_matrix(hidden, hidden, rng);
  net.Un = glorot_matrix(hidden, hidden, rng);
  net.Wout = glorot_matrix(out, hidden, rng);
  return net;
}

Eigen::VectorXd rnn_step(const RecurrentNet& net, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev, GruStepCache* cache) {
  if (x.size() != net.in_dim())
    throw ConfigError("rnn input dim " + std::to_string(x.size()) + ", expected " +
                      std::to_string(net.in_dim()));
  if (h_prev.size() != net.hidden_dim())
    throw ContractViolation("rnn hidden state has wrong dimension");
  if (!x.allFinite()) throw DataError("non-finite rnn input");

  Eigen::VectorXd z = ((net.Wz * x + net.Uz * h_prev + net.bz).array()).unaryExpr(
      [](double v) { return sigmoid(v); });
  Eigen::VectorXd r = ((net.Wr * x + net.Ur * h_prev + net.br).array()).unaryExpr(
      [](double v) { return sigmoid(v); });
  Eigen::VectorXd un = net.Un * h_prev;
  Eigen::VectorXd n = (net.Wn * x + r.cwiseProduct(un) + net.bn).array().tanh();
  Eigen::VectorXd h =
      (Eigen::VectorXd::Ones(n.size()) - z).cwiseProduct(n) + z.cwiseProduct(h_prev);
  Eigen::VectorXd out = net.Wout * h + net.bout;

  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->n = std::move(n);
    cache->un = std::move(un);
    cache->h = h;
    cache->out = out;
    cache->valid = true;
  }
  return out;
}

RnnGrads RnnGrads::zeros_like(const RecurrentNet& net) {
  RnnGrads g;
  auto zlike = [](const Eigen::MatrixXd& m) { return Eigen::MatrixXd::Zero(m.rows(), m.cols()); };
  g.Wz = zlike(net.Wz);
  g.Wr = zlike(net.Wr);
  g.Wn = zlike(net.Wn);
  g.Uz = zlike(net.Uz);
  g.Ur = zlike(net.Ur);
  g.Un = zlike(net.Un);
  g.bz = Eigen::VectorXd::Zero(net.bz.size());
  g.br = Eigen::VectorXd::Zero(net.br.size());
  g.bn = Eigen::VectorXd::Zero(net.bn.size());
  g.Wout = zlike(net.Wout);
  g.bout = Eigen::VectorXd::Zero(net.bout.size());
  return g;
}

void RnnGrads::accumulate(const RnnGrads& other) {
  Wz += other.Wz;
  Wr += other.Wr;
  Wn += other.Wn;
  Uz += other.Uz;
  Ur += other.Ur;
  Un += other.Un;
  bz += other.bz;
  br += other.br;
  bn += other.bn;
  Wout += other.Wout;
  bout += other.bout;
  for (size_t i = 0; i < other.inputs.size(); ++i) {
    if (i < inputs.size())
      inputs[i] += other.inputs[i];
    else
      inputs.push_back(other.inputs[i]);
  }
}

RnnGrads rnn_backward(const RecurrentNet& net, const std::vector<GruStepCache>& steps,
                      const std::vector<Eigen::VectorXd>& out_grads) {
  if (steps.size() != out_grads.size())
    throw ContractViolation("rnn_backward: step/grad count mismatch");
  RnnGrads g = RnnGrads::zeros_like(net);
  g.inputs.resize(steps.size());

  Eigen::VectorXd gh_next = Eigen::VectorXd::Zero(net.hidden_dim());
  for (long t = long(steps.size()) - 1; t >= 0; --t) {
    const GruStepCache& c = steps[size_t(t)];
    if (!c.valid) throw ContractViolation("rnn_backward called with a stale step cache");

    Eigen::VectorXd gh = gh_next;
    if (out_grads[size_t(t)].size()) {
      g.Wout += out_grads[size_t(t)] * c.h.transpose();
      g.bout += out_grads[size_t(t)];
      gh += net.Wout.transpose() * out_grads[size_t(t)];
    }

    Eigen::VectorXd gz = gh.cwiseProduct(c.h_prev - c.n);
    Eigen::VectorXd gn = gh.cwiseProduct(Eigen::VectorXd::Ones(c.z.size()) - c.z);
    Eigen::VectorXd gh_prev = gh.cwiseProduct(c.z);

    Eigen::VectorXd gn_pre =
        gn.cwiseProduct((Eigen::VectorXd::Ones(c.n.size()) - c.n.cwiseProduct(c.n)));
    g.Wn += gn_pre * c.x.transpose();
    g.bn += gn_pre;
    Eigen::VectorXd gr = gn_pre.cwiseProduct(c.un);
    Eigen::VectorXd gn_pre_r = gn_pre.cwiseProduct(c.r);
    g.Un += gn_pre_r * c.h_prev.transpose();
    gh_prev += net.Un.transpose() * gn_pre_r;

    Eigen::VectorXd gz_pre =
        gz.cwiseProduct(c.z).cwiseProduct(Eigen::VectorXd::Ones(c.z.size()) - c.z);
    g.Wz += gz_pre * c.x.transpose();
    g.bz += gz_pre;
    g.Uz += gz_pre * c.h_prev.transpose();
    gh_prev += net.Uz.transpose() * gz_pre;

    Eigen::VectorXd gr_pre =
        gr.cwiseProduct(c.r).cwiseProduct(Eigen::VectorXd::Ones(c.r.size()) - c.r);
    g.Wr += gr_pre * c.x.transpose();
    g.br += gr_pre;
    g.Ur += gr_pre * c.h_prev.transpose();
    gh_prev += net.Ur.transpose() * gr_pre;

    g.inputs[size_t(t)] =
        net.Wn.transpose() * gn_pre + net.Wz.transpose() * gz_pre + net.Wr.transpose() * gr_pre;
    gh_next = std::move(gh_prev);
  }
  return g;
}

std::array<double, 3> masked_softmax3(const Eigen::VectorXd& logits,
                                      const std::array<bool, 3>& legal) {
  if (logits.size() != 3) throw ConfigError("masked_softmax3 expects 3 logits");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a)
    if (legal[size_t(a)]) max_logit = std::max(max_logit, logits[a]);
  if (!std::isfinite(max_logit)) throw ContractViolation("no legal action to normalize over");

  std::array<double, 3> probs{0.0, 0.0, 0.0};
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (!legal[size_t(a)]) continue;
    probs[size_t(a)] = std::exp(logits[a] - max_logit);
    total += probs[size_t(a)];
  }
  for (int a = 0; a < 3; ++a) probs[size_t(a)] /= total;
  return probs;
}

std::vector<TensorRef> tensor_refs(FeedForwardNet& net, const std::string& prefix) {
  return {
      {prefix + ".W1", net.W1.data(), net.W1.rows(), net.W1.cols()},
      {prefix + ".W2", net.W2.data(), net.W2.rows(), net.W2.cols()},
      {prefix + ".W3", net.W3.data(), net.W3.rows(), net.W3.cols()},
      {prefix + ".b1", net.b1.data(), net.b1.size(), 1},
      {prefix + ".b2", net.b2.data(), net.b2.size(), 1},
      {prefix + ".b3", net.b3.data(), net.b3.size(), 1},
  };
}

std::vector<TensorRef> tensor_refs(RecurrentNet& net, const std::string& prefix) {
  return {
      {prefix + ".Wz", net.Wz.data(), net.Wz.rows(), net.Wz.cols()},
      {prefix + ".Wr", net.Wr.data(), net.Wr.rows(), net.Wr.cols()},
      {prefix + ".Wn", net.Wn.data(), net.Wn.rows(), net.Wn.cols()},
      {prefix + ".Uz", net.Uz.data(), net.Uz.rows(), net.Uz.cols()},
      {prefix + ".Ur", net.Ur.data(), net.Ur.rows(), net.Ur.cols()},
      {prefix + ".Un", net.Un.data(), net.Un.rows(), net.Un.cols()},
      {prefix + ".bz", net.bz.data(), net.bz.size(), 1},
      {prefix + ".br", net.br.data(), net.br.size(), 1},
      {prefix + ".bn", net.bn.data(), net.bn.size(), 1},
      {prefix + ".Wout", net.Wout.data(), net.Wout.rows(), net.Wout.cols()},
      {prefix + ".bout", net.bout.data(), net.bout.size(), 1},
  };
}

void GradientBuffer::add(const std::string& name, const double* grad, long n) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    grads_[name] = Eigen::Map<const Eigen::ArrayXd>(grad, n);
  } else {
    if (it->second.size() != n)
      throw ContractViolation("gradient size changed for tensor " + name);
    it->second += Eigen::Map<const Eigen::ArrayXd>(grad, n);
  }
}

void GradientBuffer::add(const std::string& name, const Eigen::MatrixXd& grad) {
  add(name, grad.data(), grad.size());
}

void GradientBuffer::add(const std::string& name, const Eigen::VectorXd& grad) {
  add(name, grad.data(), grad.size());
}

void GradientBuffer::add(const FfnGrads& grads, const std::string& prefix) {
  add(prefix + ".W1", grads.W1);
  add(prefix + ".W2", grads.W2);
  add(prefix + ".W3", grads.W3);
  add(prefix + ".b1", grads.b1);
  add(prefix + ".b2", grads.b2);
  add(prefix + ".b3", grads.b3);
}

void GradientBuffer::add(const RnnGrads& grads, const std::string& prefix) {
  add(prefix + ".Wz", grads.Wz);
  add(prefix + ".Wr", grads.Wr);
  add(prefix + ".Wn", grads.Wn);
  add(prefix + ".Uz", grads.Uz);
  add(prefix + ".Ur", grads.Ur);
  add(prefix + ".Un", grads.Un);
  add(prefix + ".bz", grads.bz);
  add(prefix + ".br", grads.br);
  add(prefix + ".bn", grads.bn);
  add(prefix + ".Wout", grads.Wout);
  add(prefix + ".bout", grads.bout);
}

const Eigen::ArrayXd* GradientBuffer::find(const std::string& name) const {
  auto it = grads_.find(name);
  return it == grads_.end() ? nullptr : &it->second;
}

void GradientBuffer::merge(const GradientBuffer& other) {
  for (const auto& [name, grad] : other.grads_) add(name, grad.data(), grad.size());
}

void AdamOptimizer::update(const TensorRef& param, const Eigen::ArrayXd& grad) {
  if (grad.size() != param.size())
    throw ContractViolation("gradient size mismatch for tensor " + param.name);
  if (t_ == 0) begin_step();
  auto& [m, v] = moments_[param.name];
  if (m.size() == 0) {
    m = Eigen::ArrayXd::Zero(param.size());
    v = Eigen::ArrayXd::Zero(param.size());
  }
  m = beta1_ * m + (1.0 - beta1_) * grad;
  v = beta2_ * v + (1.0 - beta2_) * grad.square();
  double bc1 = 1.0 - std::pow(beta1_, double(t_));
  double bc2 = 1.0 - std::pow(beta2_, double(t_));
  Eigen::Map<Eigen::ArrayXd> p(param.data, param.size());
  p -= lr_ * (m / bc1) / ((v / bc2).sqrt() + eps_);
  if (!p.isFinite().all())
    throw DataError("non-finite parameter value after update of " + param.name);
}

void AdamOptimizer::apply(std::vector<TensorRef> params, const GradientBuffer& grads) {
  begin_step();
  for (const TensorRef& ref : params) {
    const Eigen::ArrayXd* g = grads.find(ref.name);
    if (g) update(ref, *g);
  }
}

}  // namespace hrnacc
