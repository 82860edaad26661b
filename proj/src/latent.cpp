#include "longtail/latent.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "latent_internal.hpp"
#include "longtail/errors.hpp"

namespace longtail::latent {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

double mean_fn(const SubjectEffects& se, const PopulationEffects& pe, std::int64_t birth, double t_days) {
  const double age = (t_days - static_cast<double>(birth)) / data::kDaysPerYear;
  const double c = age - se.tau;
  return se.alpha - pe.gamma * c * c;
}

double kernel(const KernelParams& kp, double t1_days, double t2_days) {
  const double lag = std::fabs(t1_days - t2_days);
  if (lag == 0.0) return 1.0;
  return std::exp(-kp.kappa0 * std::pow(lag, kp.kappa1));
}

Eigen::MatrixXd correlation_matrix(const KernelParams& kp, const std::vector<double>& t) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0 + kCholJitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel(kp, t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& k, std::size_t subject_index) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success)
    throw numeric_error("latent: Cholesky failed after jitter for subject index " + std::to_string(subject_index));
  return llt;
}

}  // namespace

double latent_loglik(const std::vector<std::vector<double>>& z, const std::vector<std::vector<double>>& times_days,
                     const std::vector<std::int64_t>& births, const std::vector<SubjectEffects>& effects,
                     const PopulationEffects& pe, const KernelParams& kp) {
  if (z.size() != times_days.size() || z.size() != births.size() || z.size() != effects.size())
    throw numeric_error("latent_loglik: ragged inputs");
  const double log_nu = std::log(pe.nu);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t n = z[i].size();
    if (n == 0) continue;
    const Eigen::MatrixXd corr = correlation_matrix(kp, times_days[i]);
    const auto llt = factor_or_throw(corr, i);
    Eigen::VectorXd centred(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      centred(static_cast<Eigen::Index>(j)) =
          (z[i][j] - mean_fn(effects[i], pe, births[i], times_days[i][j])) / pe.nu;
    const Eigen::VectorXd w = llt.matrixL().solve(centred);
    double logdet_corr = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) logdet_corr += std::log(llt.matrixL()(j, j));
    logdet_corr *= 2.0;
    total += -0.5 * (static_cast<double>(n) * kLogTwoPi + logdet_corr) - static_cast<double>(n) * log_nu -
             0.5 * w.squaredNorm();
  }
  return total;
}

double latent_loglik(const data::Dataset& d, const std::vector<std::vector<double>>& z,
                     const std::vector<SubjectEffects>& effects, const PopulationEffects& pe,
                     const KernelParams& kp) {
  std::vector<std::vector<double>> times(d.n_subjects());
  std::vector<std::int64_t> births(d.n_subjects());
  for (std::size_t i = 0; i < d.n_subjects(); ++i) {
    births[i] = d.subjects[i].birth_date;
    times[i].reserve(d.subjects[i].n_obs());
    for (const auto& o : d.subjects[i].observations) times[i].push_back(static_cast<double>(o.time));
  }
  return latent_loglik(z, times, births, effects, pe, kp);
}

std::vector<double> gp_simulate(const SubjectEffects& se, const PopulationEffects& pe, const KernelParams& kp,
                                std::int64_t birth, const std::vector<double>& times_days,
                                const std::optional<Conditioning>& condition_on, rng::Engine& rng) {
  const std::size_t n = times_days.size();
  if (n == 0) return {};
  Eigen::VectorXd mean(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) mean(static_cast<Eigen::Index>(j)) = mean_fn(se, pe, birth, times_days[j]);
  Eigen::MatrixXd cov = pe.nu * pe.nu * correlation_matrix(kp, times_days);

  if (condition_on && !condition_on->times_days.empty()) {
    const std::size_t m = condition_on->times_days.size();
    Eigen::MatrixXd cov_pp = pe.nu * pe.nu * correlation_matrix(kp, condition_on->times_days);
    Eigen::MatrixXd cross(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < m; ++b)
        cross(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            pe.nu * pe.nu * kernel(kp, times_days[a], condition_on->times_days[b]);
    Eigen::VectorXd resid(static_cast<Eigen::Index>(m));
    for (std::size_t b = 0; b < m; ++b)
      resid(static_cast<Eigen::Index>(b)) =
          condition_on->values[b] - mean_fn(se, pe, birth, condition_on->times_days[b]);
    const auto llt = factor_or_throw(cov_pp, 0);
    mean += cross * llt.solve(resid);
    cov -= cross * llt.solve(cross.transpose());
    // Conditioning can leave tiny negative eigenvalues behind.
    for (Eigen::Index j = 0; j < cov.rows(); ++j) cov(j, j) += kCholJitter * pe.nu * pe.nu;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw numeric_error("gp_simulate: conditional covariance not positive definite");
  Eigen::VectorXd eta(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < eta.size(); ++j) eta(j) = rng.normal();
  const Eigen::VectorXd draw = mean + llt.matrixL() * eta;
  return std::vector<double>(draw.data(), draw.data() + draw.size());
}

ConditionalMoments gp_conditional_moments(const SubjectEffects& se, const PopulationEffects& pe,
                                          const KernelParams& kp, std::int64_t birth, double t_days,
                                          const Conditioning& condition_on) {
  const std::size_t m = condition_on.times_days.size();
  const double prior_mean = mean_fn(se, pe, birth, t_days);
  const double prior_var = pe.nu * pe.nu * (1.0 + kCholJitter);
  if (m == 0) return {prior_mean, prior_var};
  Eigen::MatrixXd cov_pp = pe.nu * pe.nu * correlation_matrix(kp, condition_on.times_days);
  Eigen::VectorXd cross(static_cast<Eigen::Index>(m));
  Eigen::VectorXd resid(static_cast<Eigen::Index>(m));
  for (std::size_t b = 0; b < m; ++b) {
    cross(static_cast<Eigen::Index>(b)) = pe.nu * pe.nu * kernel(kp, t_days, condition_on.times_days[b]);
    resid(static_cast<Eigen::Index>(b)) = condition_on.values[b] - mean_fn(se, pe, birth, condition_on.times_days[b]);
  }
  const auto llt = factor_or_throw(cov_pp, 0);
  const Eigen::VectorXd w = llt.solve(cross);
  return {prior_mean + w.dot(resid), std::max(prior_var - w.dot(cross), kCholJitter * pe.nu * pe.nu)};
}

}  // namespace longtail::latent
