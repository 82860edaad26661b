#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "longtail/data.hpp"
#include "longtail/rng.hpp"

namespace longtail::latent {

/// Subject-specific career trajectory: peak level alpha at age tau (years).
struct SubjectEffects {
  double alpha = 0.0;
  double tau = 25.0;
};

struct PopulationEffects {
  double gamma = 0.0;    // trajectory curvature, latent units / year^2, > 0
  double nu = 1.0;       // within-subject sd, > 0
  double v_alpha = 6.0;  // between-subject sd, fixed at configuration time
};

/// Powered-exponential kernel over day-scale lags, kappa1 in [0.5, 2].
struct KernelParams {
  double kappa0 = 1.0;
  double kappa1 = 1.0;
};

/// alpha - gamma (age - tau)^2 with age = (t - birth)/365.25 years.
double mean_fn(const SubjectEffects& se, const PopulationEffects& pe, std::int64_t birth, double t_days);

/// exp(-kappa0 |t1 - t2|^kappa1), lag in days.
double kernel(const KernelParams& kp, double t1_days, double t2_days);

inline constexpr double kCholJitter = 1e-8;

/// Sum over subjects of the multivariate normal log-density of z_i with mean
/// mean_fn at the subject's times and covariance nu^2 (K + jitter I).
/// z, times_days are subject-major and must be congruent with births/effects.
/// Throws numeric_error naming the subject if the factorization fails.
double latent_loglik(const std::vector<std::vector<double>>& z, const std::vector<std::vector<double>>& times_days,
                     const std::vector<std::int64_t>& births, const std::vector<SubjectEffects>& effects,
                     const PopulationEffects& pe, const KernelParams& kp);

/// Dataset-shaped convenience overload (times and births from d).
double latent_loglik(const data::Dataset& d, const std::vector<std::vector<double>>& z,
                     const std::vector<SubjectEffects>& effects, const PopulationEffects& pe, const KernelParams& kp);

struct Conditioning {
  std::vector<double> times_days;
  std::vector<double> values;
};

/// Draws from the subject's Gaussian process at `times_days`, conditioned on
/// past values when supplied.
std::vector<double> gp_simulate(const SubjectEffects& se, const PopulationEffects& pe, const KernelParams& kp,
                                std::int64_t birth, const std::vector<double>& times_days,
                                const std::optional<Conditioning>& condition_on, rng::Engine& rng);

/// Conditional law of the process at one time given values at others.
struct ConditionalMoments {
  double mean;
  double var;
};
ConditionalMoments gp_conditional_moments(const SubjectEffects& se, const PopulationEffects& pe,
                                          const KernelParams& kp, std::int64_t birth, double t_days,
                                          const Conditioning& condition_on);

}  // namespace longtail::latent
