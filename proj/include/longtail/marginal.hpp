#pragma once

#include <vector>

#include "longtail/dist.hpp"

namespace longtail::marginal {

/// Logit-linear threshold exceedance rate; t is in years since the
/// data-window start.
struct RateParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
};

double lambda_u(const RateParams& rate, double t_years);

/// Observed-space marginal: GPD tail above u, exceedance rate lambda_u(t),
/// scale constant in t.
struct MarginalParams {
  dist::GpdParams gpd;
  RateParams rate;
};

/// 1 - lambda_u(t) [1 + xi (x-u)/sigma]_+^(-1/xi) for x > u; continuous at
/// x -> u+ with value 1 - lambda_u(t).
double fx_cdf(const MarginalParams& mp, double x, double t_years);

/// Inverse of fx_cdf on the exceedance branch: requires p >= 1 - lambda_u(t).
double fx_quantile(const MarginalParams& mp, double p, double t_years);

/// Uniform(0,1) auxiliary variables standing in for the censored
/// (sub-threshold) observations, in partition order.
struct AuxBelow {
  std::vector<double> v;
};

/// Counters for degenerate events during likelihood work.
struct EvalDiagnostics {
  long pdf_floor_hits = 0;
  long domain_failures = 0;
};

inline constexpr double kPdfFloor = 1e-300;

// Probability-integral-transform to the latent space through the mixture
// marginal, using the grid-search inverse.
double to_latent_above(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g, double x,
                       double t_years);
double to_latent_below(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g, double v,
                       double t_years);
/// Latent-space image of the threshold: u_Z(t) = G^-1(1 - lambda_u(t)).
double latent_threshold(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g,
                        double t_years);

// Bisection-exact counterparts (test oracles for the grid scheme).
double to_latent_above_exact(const MarginalParams& mp, const dist::MixtureMarginal& m, double x, double t_years,
                             double tol = 1e-10);
double to_latent_below_exact(const MarginalParams& mp, const dist::MixtureMarginal& m, double v, double t_years,
                             double tol = 1e-10);

/// dz/dx of the exceedance transform at z = to_latent(x).
double jacobian_above(const MarginalParams& mp, const dist::MixtureMarginal& m, double x, double t_years, double z,
                      EvalDiagnostics* diag = nullptr);
/// dz/dv of the censored transform at z = to_latent(v).
double jacobian_below(const MarginalParams& mp, const dist::MixtureMarginal& m, double v, double t_years, double z,
                      EvalDiagnostics* diag = nullptr);

}  // namespace longtail::marginal
