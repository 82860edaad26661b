#pragma once

#include <cstddef>
#include <vector>

namespace longtail::dist {

// ---------------------------------------------------------------------------
// Univariate normal
// ---------------------------------------------------------------------------

double norm_pdf(double x);
double norm_cdf(double x);
/// Inverse standard normal CDF (Wichura's AS 241, PPND16 accuracy).
double norm_quantile(double q);

/// P(A <= h, B <= k) for standard bivariate normal with correlation rho,
/// |rho| < 1. Deterministic fixed-order Gauss-Legendre quadrature on the
/// Drezner-Wesolowsky single-integral form; absolute error well below 1e-7.
double bvn_cdf(double h, double k, double rho);

// ---------------------------------------------------------------------------
// Generalised Pareto / generalised extreme value
// ---------------------------------------------------------------------------

/// Shape switches to the exponential/Gumbel limit when |xi| < kXiTiny.
inline constexpr double kXiTiny = 1e-8;

struct GpdParams {
  double u;        // threshold
  double sigma_u;  // scale, > 0
  double xi;       // shape

  /// Upper endpoint u - sigma_u/xi for xi < 0, +infinity otherwise.
  double upper_endpoint() const;
};

double gpd_cdf(const GpdParams& p, double x);
double gpd_quantile(const GpdParams& p, double q);

struct GevParams {
  double mu;
  double sigma;  // > 0
  double xi;
};

double gev_cdf(const GevParams& p, double x);

// ---------------------------------------------------------------------------
// Gaussian mixture marginal and its grid inverse
// ---------------------------------------------------------------------------

struct MixtureComponent {
  double mean;
  double sd;  // > 0
};

/// Equal-weight Gaussian mixture, one component per observation.
struct MixtureMarginal {
  std::vector<MixtureComponent> components;

  std::size_t size() const { return components.size(); }
};

double mixture_cdf(const MixtureMarginal& m, double z);
double mixture_pdf(const MixtureMarginal& m, double z);

/// Finite regular grid of latent-space nodes.
struct GridSpec {
  double lo;
  double hi;
  std::size_t count;  // >= 2

  double spacing() const { return (hi - lo) / static_cast<double>(count - 1); }
  double node(std::size_t k) const { return lo + static_cast<double>(k) * spacing(); }
};

/// Grid covering every component mean +/- 6 max sd, 2001 nodes.
GridSpec default_grid(const MixtureMarginal& m, std::size_t count = 2001);

struct GridInverseResult {
  double z;         // grid node minimising |CDF - p|
  std::size_t idx;  // its index
  double residual;  // |CDF(z) - p|
};

/// Exact argmin over grid nodes of |mixture_cdf(z) - p|. The mixture CDF is
/// monotone, so the argmin is one of the two nodes bracketing the crossing;
/// a binary search finds them without touching the rest of the grid.
/// Throws numeric_error naming the violated side when p falls outside the
/// CDF range attained on the grid.
GridInverseResult mixture_inverse_detailed(const MixtureMarginal& m, double p, const GridSpec& g);
double mixture_inverse(const MixtureMarginal& m, double p, const GridSpec& g);

/// Bisection inverse of the mixture CDF to tolerance tol. Test oracle for the
/// grid scheme; the likelihood never uses it.
double mixture_inverse_exact(const MixtureMarginal& m, double p, double tol = 1e-10);

}  // namespace longtail::dist
