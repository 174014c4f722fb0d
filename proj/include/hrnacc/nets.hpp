#ifndef HRNACC_NETS_HPP
#define HRNACC_NETS_HPP

#include <Eigen/Core>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "hrnacc/rng.hpp"
#include "hrnacc/types.hpp"

namespace hrnacc {

// Two ReLU hidden layers; dropout on hidden activations in training mode.
struct FeedForwardNet {
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;
  double dropout_rate = 0.0;

  int in_dim() const { return int(W1.cols()); }
  int hidden_dim() const { return int(W1.rows()); }
  int out_dim() const { return int(W3.rows()); }

  static FeedForwardNet zeros(int in, int hidden, int out, double dropout = 0.0);
  static FeedForwardNet glorot(int in, int hidden, int out, double dropout, Rng& rng);
};

struct FfnCache {
  Eigen::VectorXd x, z1, a1, z2, a2, y;
  Eigen::VectorXd mask1, mask2;  // inverted-dropout keep masks; empty in eval mode
  bool training = false;
  bool valid = false;
};

// Deterministic given rng state; dropout masks drawn only when training.
// Throws DataError on non-finite input.
Eigen::VectorXd ffn_forward(const FeedForwardNet& net, const Eigen::VectorXd& x, bool training,
                            Rng* rng = nullptr, FfnCache* cache = nullptr);

struct FfnGrads {
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;
  Eigen::VectorXd input;  // dL/dx

  static FfnGrads zeros_like(const FeedForwardNet& net);
  void accumulate(const FfnGrads& other);
};

FfnGrads ffn_backward(const FeedForwardNet& net, const FfnCache& cache,
                      const Eigen::VectorXd& out_grad);

// GRU cell plus a linear output head. Hidden state is carried across the
// steps of one episode and reset between episodes.
struct RecurrentNet {
  Eigen::MatrixXd Wz, Wr, Wn;  // input -> hidden
  Eigen::MatrixXd Uz, Ur, Un;  // hidden -> hidden
  Eigen::VectorXd bz, br, bn;
  Eigen::MatrixXd Wout;
  Eigen::VectorXd bout;

  int in_dim() const { return int(Wz.cols()); }
  int hidden_dim() const { return int(Wz.rows()); }
  int out_dim() const { return int(Wout.rows()); }

  Eigen::VectorXd initial_hidden() const { return Eigen::VectorXd::Zero(hidden_dim()); }

  static RecurrentNet zeros(int in, int hidden, int out);
  static RecurrentNet glorot(int in, int hidden, int out, Rng& rng);
};

struct GruStepCache {
  Eigen::VectorXd x, h_prev, z, r, n, un, h, out;
  bool valid = false;
};

// One recurrence step; returns the head output and writes the new hidden
// state (and intermediates) into the cache.
Eigen::VectorXd rnn_step(const RecurrentNet& net, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev, GruStepCache* cache);

struct RnnGrads {
  Eigen::MatrixXd Wz, Wr, Wn, Uz, Ur, Un;
  Eigen::VectorXd bz, br, bn;
  Eigen::MatrixXd Wout;
  Eigen::VectorXd bout;
  std::vector<Eigen::VectorXd> inputs;  // dL/dx_t per step

  static RnnGrads zeros_like(const RecurrentNet& net);
  void accumulate(const RnnGrads& other);
};

// Backpropagation through time over one episode's step caches. out_grads[t]
// is dL/d(head output at step t); a zero vector marks steps without loss.
RnnGrads rnn_backward(const RecurrentNet& net, const std::vector<GruStepCache>& steps,
                      const std::vector<Eigen::VectorXd>& out_grads);

// Softmax over the legal subset; illegal entries get probability exactly 0.
std::array<double, 3> masked_softmax3(const Eigen::VectorXd& logits,
                                      const std::array<bool, 3>& legal);

double sigmoid(double z);

// Mutable view over one named parameter tensor (column-major contiguous).
struct TensorRef {
  std::string name;
  double* data = nullptr;
  long rows = 0, cols = 0;

  long size() const { return rows * cols; }
};

std::vector<TensorRef> tensor_refs(FeedForwardNet& net, const std::string& prefix);
std::vector<TensorRef> tensor_refs(RecurrentNet& net, const std::string& prefix);

// Named gradient accumulator, zeroed per batch.
class GradientBuffer {
 public:
  void add(const std::string& name, const double* grad, long n);
  void add(const std::string& name, const Eigen::MatrixXd& grad);
  void add(const std::string& name, const Eigen::VectorXd& grad);
  void add(const FfnGrads& grads, const std::string& prefix);
  void add(const RnnGrads& grads, const std::string& prefix);
  const Eigen::ArrayXd* find(const std::string& name) const;
  void merge(const GradientBuffer& other);
  void clear() { grads_.clear(); }
  bool empty() const { return grads_.empty(); }

 private:
  std::map<std::string, Eigen::ArrayXd> grads_;
};

// Per-parameter adaptive moments. update() guards against non-finite
// parameter values after the step.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

  void begin_step() { ++t_; }
  void update(const TensorRef& param, const Eigen::ArrayXd& grad);
  // Applies every gradient in the buffer whose name matches a ref.
  void apply(std::vector<TensorRef> params, const GradientBuffer& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<std::string, std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> moments_;
};

}  // namespace hrnacc

#endif  // HRNACC_NETS_HPP
