#include "longtail/deplab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "longtail/dist.hpp"
#include "longtail/errors.hpp"
#include "longtail/rng.hpp"

namespace longtail::deplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Exact draw of max of k iid standard normals via the quantile of the
/// maximum; the tail probability is kept in complementary form so precision
/// survives k in the millions.
double max_std_normal(rng::Engine& rng, std::size_t k) {
  if (k == 0) return kNegInf;
  const double log_u = std::log(rng.uniform_open());
  const double upper_tail = -std::expm1(log_u / static_cast<double>(k));  // 1 - U^(1/k)
  return -dist::norm_quantile(upper_tail);
}

struct BivPair {
  double x1, x2;
};

BivPair bivariate_pair(rng::Engine& rng, double mean, double rho) {
  const double e1 = rng.normal();
  const double e2 = rng.normal();
  return {mean + e1, mean + rho * e1 + std::sqrt(1.0 - rho * rho) * e2};
}

double binom_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace

PairSample gaussian_copula_sample(double rho, std::size_t n, std::uint64_t seed) {
  rng::Engine rng(seed);
  PairSample s;
  s.u1.reserve(n);
  s.u2.reserve(n);
  const double root = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rho * a + root * rng.normal();
    s.u1.push_back(dist::norm_cdf(a));
    s.u2.push_back(dist::norm_cdf(b));
  }
  return s;
}

ChiEstimate chi_chibar(const PairSample& s, double q) {
  const double n = static_cast<double>(s.size());
  if (n * (1.0 - q) < 50.0) throw numeric_error("chi_chibar: too few expected exceedances (need n(1-q) >= 50)");
  std::size_t c1 = 0, c2 = 0, cj = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool e1 = s.u1[i] > q;
    const bool e2 = s.u2[i] > q;
    c1 += e1;
    c2 += e2;
    cj += e1 && e2;
  }
  if (cj == 0) throw numeric_error("chi_chibar: no joint exceedances; estimate undefined");

  ChiEstimate out{};
  const double pj = static_cast<double>(cj) / n;
  out.chi = pj / (1.0 - q);
  out.chi_se = binom_se(pj, n) / (1.0 - q);

  // Symmetrised marginal exceedance probability: a coordinate swap leaves the
  // estimator bit-identical.
  const double pm = static_cast<double>(c1 + c2) / (2.0 * n);
  const double log_pm = std::log(pm);
  const double log_pj = std::log(pj);
  out.chibar = 2.0 * log_pm / log_pj - 1.0;
  const double var_log_pm = (1.0 - pm) / (2.0 * n * pm);
  const double var_log_pj = (1.0 - pj) / (n * pj);
  out.chibar_se = std::sqrt((2.0 / log_pj) * (2.0 / log_pj) * var_log_pm +
                            (2.0 * log_pm / (log_pj * log_pj)) * (2.0 * log_pm / (log_pj * log_pj)) * var_log_pj);
  return out;
}

// ---------------------------------------------------------------------------
// Lag measures on the Gaussian test-bed
// ---------------------------------------------------------------------------

namespace {

double maxima_margin_cdf(double x, std::size_t n, double alpha_n) {
  return std::pow(dist::norm_cdf(x), static_cast<double>(n - 1)) * dist::norm_cdf(x - alpha_n);
}

double maxima_margin_quantile(double q, std::size_t n, double alpha_n) {
  double lo = -10.0, hi = alpha_n + 10.0 + std::sqrt(2.0 * std::log(static_cast<double>(n + 1)));
  while (maxima_margin_cdf(lo, n, alpha_n) > q) lo -= 5.0;
  while (maxima_margin_cdf(hi, n, alpha_n) < q) hi += 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (maxima_margin_cdf(mid, n, alpha_n) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LagMeasures lag_measures(std::size_t n_subjects, double alpha_n, double rho, double q, std::size_t replications,
                         std::uint64_t seed) {
  if (n_subjects == 0) throw numeric_error("lag_measures: need at least one subject");
  rng::Engine rng(seed);
  const double n_rep = static_cast<double>(replications);
  const std::size_t field = n_subjects - 1;

  std::size_t joint_subject = 0, joint_m = 0, joint_r = 0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const BivPair sub = bivariate_pair(rng, alpha_n, rho);
    const double m1f = max_std_normal(rng, field);
    const double m2f = max_std_normal(rng, field);
    // subject-level measure on subject n's own margins
    joint_subject += (dist::norm_cdf(sub.x1 - alpha_n) > q) && (dist::norm_cdf(sub.x2 - alpha_n) > q);
    // maxima margins
    const double m1 = std::max(m1f, sub.x1);
    const double m2 = std::max(m2f, sub.x2);
    joint_m += (maxima_margin_cdf(m1, n_subjects, alpha_n) > q) && (maxima_margin_cdf(m2, n_subjects, alpha_n) > q);
    // random-subject margins: independent picks at each time point
    const std::size_t k1 = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_subjects));
    const std::size_t k2 = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_subjects));
    const double x1 = (k1 >= field) ? sub.x1 : rng.normal();
    const double x2 = (k2 >= field) ? sub.x2 : rng.normal();
    const auto fr = [&](double x) {
      return (static_cast<double>(field) * dist::norm_cdf(x) + dist::norm_cdf(x - alpha_n)) /
             static_cast<double>(n_subjects);
    };
    joint_r += (fr(x1) > q) && (fr(x2) > q);
  }

  LagMeasures out{};
  const auto plugin = [&](std::size_t count, double& est, double& se) {
    const double p = static_cast<double>(count) / n_rep;
    est = p / (1.0 - q);
    se = binom_se(p, n_rep) / (1.0 - q);
  };
  plugin(joint_subject, out.chi_subject, out.chi_subject_se);
  plugin(joint_m, out.chi_m, out.chi_m_se);
  plugin(joint_r, out.chi_r, out.chi_r_se);

  // Closed form for the maxima measure: the field is independent across time,
  // only subject n's pair couples the two maxima.
  const double x_q = maxima_margin_quantile(q, n_subjects, alpha_n);
  const double both = std::pow(dist::norm_cdf(x_q), 2.0 * static_cast<double>(field)) *
                      dist::bvn_cdf(x_q - alpha_n, x_q - alpha_n, rho);
  out.chi_m_analytic = (1.0 - 2.0 * q + both) / (1.0 - q);
  return out;
}

// ---------------------------------------------------------------------------
// Componentwise maxima limit
// ---------------------------------------------------------------------------

MaximaLimitResult maxima_limit(const LimitExperiment& exp) {
  if (exp.replications < 10000) throw numeric_error("maxima_limit: need >= 1e4 replications");
  rng::Engine rng(exp.seed);
  const double n = static_cast<double>(exp.n);
  const double root2logn = std::sqrt(2.0 * std::log(n));

  MaximaLimitResult out{};
  out.a_n = 1.0 / root2logn;
  out.b_n = root2logn - (std::log(std::log(n)) + std::log(4.0 * std::numbers::pi)) / (2.0 * root2logn);
  out.alpha_n = (exp.growth_case == 1) ? root2logn * std::log(std::log(n)) : 0.0;

  constexpr int kLattice = 9;
  std::vector<double> grid(kLattice);
  for (int i = 0; i < kLattice; ++i) grid[i] = -2.0 + 4.0 * static_cast<double>(i) / (kLattice - 1);

  std::vector<std::size_t> counts(static_cast<std::size_t>(kLattice * kLattice), 0);
  std::size_t origin_count = 0;
  for (std::size_t rep = 0; rep < exp.replications; ++rep) {
    const BivPair sub = bivariate_pair(rng, out.alpha_n, exp.rho);
    const double m1 = std::max(max_std_normal(rng, exp.n - 1), sub.x1);
    const double m2 = std::max(max_std_normal(rng, exp.n - 1), sub.x2);
    double s1, s2;
    if (exp.growth_case == 1) {
      s1 = m1 - out.alpha_n;
      s2 = m2 - out.alpha_n;
    } else {
      s1 = (m1 - out.b_n) / out.a_n;
      s2 = (m2 - out.b_n) / out.a_n;
    }
    for (int i = 0; i < kLattice; ++i)
      for (int j = 0; j < kLattice; ++j)
        counts[static_cast<std::size_t>(i * kLattice + j)] += (s1 <= grid[i]) && (s2 <= grid[j]);
    origin_count += (s1 <= 0.0) && (s2 <= 0.0);
  }

  const auto limit_cdf = [&](double x, double y) {
    if (exp.growth_case == 1) return dist::bvn_cdf(x, y, exp.rho);
    return std::exp(-std::exp(-x)) * std::exp(-std::exp(-y));
  };
  out.sup_distance = 0.0;
  for (int i = 0; i < kLattice; ++i)
    for (int j = 0; j < kLattice; ++j) {
      const double emp =
          static_cast<double>(counts[static_cast<std::size_t>(i * kLattice + j)]) / static_cast<double>(exp.replications);
      out.sup_distance = std::max(out.sup_distance, std::fabs(emp - limit_cdf(grid[i], grid[j])));
    }
  out.at_origin = static_cast<double>(origin_count) / static_cast<double>(exp.replications);
  out.at_origin_se = binom_se(out.at_origin, static_cast<double>(exp.replications));
  out.limit_at_origin = limit_cdf(0.0, 0.0);

  // Exact finite-n marginal law against its limit; no Monte-Carlo noise.
  out.marginal_ks = 0.0;
  if (exp.growth_case == 1) {
    for (double x = -8.0; x <= 8.0; x += 0.002) {
      const double exact = std::pow(dist::norm_cdf(out.alpha_n + x), n - 1.0) * dist::norm_cdf(x);
      out.marginal_ks = std::max(out.marginal_ks, std::fabs(exact - dist::norm_cdf(x)));
    }
  } else {
    for (double x = -4.0; x <= 14.0; x += 0.002) {
      const double exact = std::pow(dist::norm_cdf(out.a_n * x + out.b_n), n);
      out.marginal_ks = std::max(out.marginal_ks, std::fabs(exact - std::exp(-std::exp(-x))));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conditional exceedance limit
// ---------------------------------------------------------------------------

ConditionalLimitResult conditional_limit(double delta, double rho, std::size_t n, std::size_t replications,
                                         std::uint64_t seed) {
  rng::Engine rng(seed);
  const double x_n = std::sqrt(2.0 * std::log(static_cast<double>(n)));
  const double alpha_pinned = x_n - delta;

  ConditionalLimitResult out{};
  out.analytic = (1.0 - 2.0 * dist::norm_cdf(delta) + dist::bvn_cdf(delta, delta, rho)) / (1.0 - dist::norm_cdf(delta));

  std::size_t cond = 0, joint = 0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const BivPair sub = bivariate_pair(rng, alpha_pinned, rho);
    const double m1 = std::max(max_std_normal(rng, n - 1), sub.x1);
    const double m2 = std::max(max_std_normal(rng, n - 1), sub.x2);
    if (m1 > x_n) {
      ++cond;
      joint += m2 > x_n;
    }
  }
  if (cond == 0) throw numeric_error("conditional_limit: conditioning event never occurred");
  out.estimate = static_cast<double>(joint) / static_cast<double>(cond);
  out.se = binom_se(out.estimate, static_cast<double>(cond));

  std::size_t cond2 = 0, joint2 = 0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const BivPair sub = bivariate_pair(rng, 0.0, rho);
    const double m1 = std::max(max_std_normal(rng, n - 1), sub.x1);
    const double m2 = std::max(max_std_normal(rng, n - 1), sub.x2);
    if (m1 > x_n) {
      ++cond2;
      joint2 += m2 > x_n;
    }
  }
  out.case2_estimate = cond2 ? static_cast<double>(joint2) / static_cast<double>(cond2) : 0.0;
  out.case2_se = cond2 ? binom_se(out.case2_estimate, static_cast<double>(cond2)) : 0.0;

  // Same-subject maximum probability under the growing schedule.
  const double alpha_grow = x_n * std::log(std::log(static_cast<double>(n)));
  std::size_t cond3 = 0, joint3 = 0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const BivPair sub = bivariate_pair(rng, alpha_grow, rho);
    const double f1 = max_std_normal(rng, n - 1);
    const double f2 = max_std_normal(rng, n - 1);
    const double m1 = std::max(f1, sub.x1);
    if (m1 > alpha_grow) {
      ++cond3;
      joint3 += (sub.x1 >= f1) && (sub.x2 >= f2);
    }
  }
  out.same_subject_prob = cond3 ? static_cast<double>(joint3) / static_cast<double>(cond3) : 0.0;
  out.same_subject_se = cond3 ? binom_se(out.same_subject_prob, static_cast<double>(cond3)) : 0.0;
  return out;
}

}  // namespace longtail::deplab
