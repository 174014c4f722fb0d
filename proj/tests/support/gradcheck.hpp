#ifndef HRNACC_TESTS_GRADCHECK_HPP
#define HRNACC_TESTS_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hrnacc/nets.hpp"

namespace hrnacc::testsupport {

struct GradCheckResult {
  int checked = 0;
  int failed = 0;
  double worst_rel_err = 0.0;
  std::string worst_tensor;

  bool ok() const { return failed == 0 && checked > 0; }
};

// Central differences are only valid when no ReLU pre-activation sits
// within the probe step of its kink; callers resample random configs until
// the margin holds.
inline double relu_margin(const FeedForwardNet& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd z1 = net.W1 * x + net.b1;
  Eigen::VectorXd a1 = z1.cwiseMax(0.0);
  Eigen::VectorXd z2 = net.W2 * a1 + net.b2;
  return std::min(z1.cwiseAbs().minCoeff(), z2.cwiseAbs().minCoeff());
}

// Central finite differences over a sample of entries per tensor. The loss
// callback must be a pure function of the referenced parameters.
inline GradCheckResult check_gradients(const std::vector<TensorRef>& params,
                                       const GradientBuffer& analytic,
                                       const std::function<double()>& loss,
                                       double step = 1e-4, double tolerance = 1e-3,
                                       int samples_per_tensor = 6) {
  GradCheckResult result;
  for (const TensorRef& ref : params) {
    const Eigen::ArrayXd* grad = analytic.find(ref.name);
    if (!grad) continue;
    long stride = std::max<long>(1, ref.size() / samples_per_tensor);
    for (long idx = 0; idx < ref.size(); idx += stride) {
      double saved = ref.data[idx];
      ref.data[idx] = saved + step;
      double up = loss();
      ref.data[idx] = saved - step;
      double down = loss();
      ref.data[idx] = saved;
      double fd = (up - down) / (2.0 * step);
      double an = (*grad)[idx];
      double scale = std::max({std::abs(fd), std::abs(an), 1e-8});
      double rel = std::abs(fd - an) / scale;
      if (std::abs(fd) < 1e-9 && std::abs(an) < 1e-9) rel = 0.0;
      ++result.checked;
      if (rel > result.worst_rel_err) {
        result.worst_rel_err = rel;
        result.worst_tensor = ref.name;
      }
      if (rel >= tolerance) ++result.failed;
    }
  }
  return result;
}

}  // namespace hrnacc::testsupport

#endif  // HRNACC_TESTS_GRADCHECK_HPP
