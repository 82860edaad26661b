#pragma once

#include <Eigen/Dense>
#include <vector>

#include "longtail/rng.hpp"

namespace longtail::detail {

/// Adaptive Gaussian random-walk proposal for one parameter block. During
/// burn-in the scalar scale follows a Robbins-Monro recursion toward the
/// target acceptance rate and the proposal shape tracks the empirical
/// covariance of the visited states; both freeze afterwards.
class BlockSampler {
 public:
  BlockSampler(int dim, double target_accept);

  void propose(const double* current, double* out, rng::Engine& rng);
  void adapt(bool accepted, long t);
  void observe(const double* current);

  double acceptance_rate() const { return proposals_ ? static_cast<double>(accepts_) / proposals_ : 0.0; }

 private:
  void refresh_shape();

  int dim_;
  double target_;
  double log_scale_;
  long proposals_ = 0, accepts_ = 0;
  // Welford accumulators
  long n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  Eigen::MatrixXd shape_;  // lower-triangular proposal factor
};

}  // namespace longtail::detail
