#pragma once

#include <Eigen/Dense>
#include <vector>

#include "longtail/latent.hpp"

namespace longtail::latent {

/// Kernel correlation matrix with the standard jitter already on the diagonal.
Eigen::MatrixXd correlation_matrix(const KernelParams& kp, const std::vector<double>& times_days);

}  // namespace longtail::latent
