#pragma once

#include <cstdint>
#include <vector>

namespace longtail::deplab {

/// Pairs on uniform margins.
struct PairSample {
  std::vector<double> u1, u2;

  std::size_t size() const { return u1.size(); }
};

/// (Phi(A), Phi(B)) for a standard bivariate normal pair with correlation rho.
PairSample gaussian_copula_sample(double rho, std::size_t n, std::uint64_t seed);

struct ChiEstimate {
  double chi, chi_se;
  double chibar, chibar_se;
};

/// Empirical tail-dependence coefficients at quantile q with Monte-Carlo
/// standard errors. The chibar estimator symmetrises the marginal exceedance
/// count so a coordinate swap is bit-identical. Requires n (1-q) >= 50 and at
/// least one joint exceedance.
ChiEstimate chi_chibar(const PairSample& s, double q);

/// Two-time-point Gaussian test-bed: n-1 iid standard subjects, independent
/// across time, plus one subject at mean alpha_n whose pair has correlation
/// rho. Plug-in estimates of the subject-level, maxima-margin and
/// random-subject lag measures at quantile q, with the maxima measure's
/// closed form for cross-checking.
struct LagMeasures {
  double chi_subject, chi_subject_se;
  double chi_m, chi_m_se;
  double chi_r, chi_r_se;
  double chi_m_analytic;
};
LagMeasures lag_measures(std::size_t n_subjects, double alpha_n, double rho, double q, std::size_t replications,
                         std::uint64_t seed);

struct LimitExperiment {
  std::size_t n = 10000;
  double rho = 0.0;
  int growth_case = 1;  // 1: alpha_n = sqrt(2 log n) log log n; 2: alpha_n = 0
  std::size_t replications = 100000;
  std::uint64_t seed = 1;
};

struct MaximaLimitResult {
  double alpha_n, a_n, b_n;
  /// Sup over a 9x9 lattice on [-2,2]^2 of |empirical joint CDF - limit|.
  double sup_distance;
  double at_origin, at_origin_se, limit_at_origin;
  /// Exact finite-n marginal law vs its limit (Gaussian for case 1, Gumbel
  /// for case 2), sup over a fine grid. Deterministic.
  double marginal_ks;
};
MaximaLimitResult maxima_limit(const LimitExperiment& exp);

struct ConditionalLimitResult {
  double analytic;  // (1 - 2 Phi(d) + Phi2(d,d;rho)) / (1 - Phi(d))
  double estimate, se;
  double case2_estimate, case2_se;  // alpha_n = 0; limit 0
  double same_subject_prob, same_subject_se;  // growing alpha_n; limit 1
};
/// P(M_n2 > x_n | M_n1 > x_n) with x_n = sqrt(2 log n), alpha_n = x_n - delta.
ConditionalLimitResult conditional_limit(double delta, double rho, std::size_t n, std::size_t replications,
                                         std::uint64_t seed);

}  // namespace longtail::deplab
