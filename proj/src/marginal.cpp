#include "longtail/marginal.hpp"

#include <cmath>

#include "longtail/errors.hpp"

namespace longtail::marginal {

double lambda_u(const RateParams& rate, double t_years) {
  const double a = rate.beta0 + rate.beta1 * t_years;
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

namespace {

// GPD survival [1 + xi (x-u)/sigma]_+^(-1/xi), exponential limit at xi ~ 0.
double gpd_survival(const dist::GpdParams& p, double x) {
  const double w = (x - p.u) / p.sigma_u;
  if (std::fabs(p.xi) < dist::kXiTiny) return std::exp(-w);
  const double t = 1.0 + p.xi * w;
  if (t <= 0.0) return 0.0;
  return std::exp(-std::log(t) / p.xi);
}

}  // namespace

double fx_cdf(const MarginalParams& mp, double x, double t_years) {
  if (x <= mp.gpd.u)
    throw numeric_error("fx_cdf: x at or below the threshold; censored observations take the auxiliary path");
  return 1.0 - lambda_u(mp.rate, t_years) * gpd_survival(mp.gpd, x);
}

double fx_quantile(const MarginalParams& mp, double p, double t_years) {
  const double lam = lambda_u(mp.rate, t_years);
  const double s = (1.0 - p) / lam;  // survival of the exceedance law
  if (!(s >= 0.0 && s <= 1.0)) throw numeric_error("fx_quantile: p below the exceedance branch");
  return dist::gpd_quantile(mp.gpd, 1.0 - s);
}

double to_latent_above(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g, double x,
                       double t_years) {
  return dist::mixture_inverse(m, fx_cdf(mp, x, t_years), g);
}

double to_latent_below(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g, double v,
                       double t_years) {
  if (!(v > 0.0 && v < 1.0)) throw numeric_error("to_latent_below: v must lie in (0,1)");
  return dist::mixture_inverse(m, (1.0 - lambda_u(mp.rate, t_years)) * v, g);
}

double latent_threshold(const MarginalParams& mp, const dist::MixtureMarginal& m, const dist::GridSpec& g,
                        double t_years) {
  return dist::mixture_inverse(m, 1.0 - lambda_u(mp.rate, t_years), g);
}

double to_latent_above_exact(const MarginalParams& mp, const dist::MixtureMarginal& m, double x, double t_years,
                             double tol) {
  return dist::mixture_inverse_exact(m, fx_cdf(mp, x, t_years), tol);
}

double to_latent_below_exact(const MarginalParams& mp, const dist::MixtureMarginal& m, double v, double t_years,
                             double tol) {
  if (!(v > 0.0 && v < 1.0)) throw numeric_error("to_latent_below_exact: v must lie in (0,1)");
  return dist::mixture_inverse_exact(m, (1.0 - lambda_u(mp.rate, t_years)) * v, tol);
}

namespace {

double floored_pdf(const dist::MixtureMarginal& m, double z, EvalDiagnostics* diag) {
  double g = dist::mixture_pdf(m, z);
  if (g < kPdfFloor) {
    g = kPdfFloor;
    if (diag) ++diag->pdf_floor_hits;
  }
  return g;
}

}  // namespace

double jacobian_above(const MarginalParams& mp, const dist::MixtureMarginal& m, double x, double t_years, double z,
                      EvalDiagnostics* diag) {
  const double lam = lambda_u(mp.rate, t_years);
  const double w = (x - mp.gpd.u) / mp.gpd.sigma_u;
  double density_factor;  // [1 + xi w]^(-1/xi - 1)
  if (std::fabs(mp.gpd.xi) < dist::kXiTiny) {
    density_factor = std::exp(-w);
  } else {
    const double t = 1.0 + mp.gpd.xi * w;
    if (t <= 0.0) return 0.0;
    density_factor = std::exp((-1.0 / mp.gpd.xi - 1.0) * std::log(t));
  }
  return lam * density_factor / (mp.gpd.sigma_u * floored_pdf(m, z, diag));
}

double jacobian_below(const MarginalParams& mp, const dist::MixtureMarginal& m, double v, double t_years, double z,
                      EvalDiagnostics* diag) {
  if (!(v > 0.0 && v < 1.0)) throw numeric_error("jacobian_below: v must lie in (0,1)");
  return (1.0 - lambda_u(mp.rate, t_years)) / floored_pdf(m, z, diag);
}

}  // namespace longtail::marginal
