#include "likelihood.hpp"

#include <cmath>
#include <limits>

#include "latent_internal.hpp"
#include "longtail/errors.hpp"
#include "longtail/marginal.hpp"

namespace longtail::detail {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

LikelihoodEngine::LikelihoodEngine(const data::Dataset& d, const dist::GridSpec& g)
    : state_mix_(g), scratch_mix_(g) {
  n_sub_ = d.n_subjects();
  u_ = d.threshold_u;
  sub_first_.resize(n_sub_ + 1, 0);
  sub_times_.resize(n_sub_);
  for (std::size_t i = 0; i < n_sub_; ++i) {
    const auto& s = d.subjects[i];
    sub_first_[i + 1] = sub_first_[i] + s.n_obs();
    births_.push_back(s.birth_date);
    for (const auto& o : s.observations) {
      t_days_.push_back(static_cast<double>(o.time));
      t_years_.push_back(d.t_years(o.time));
      x_.push_back(o.value);
      sub_times_[i].push_back(static_cast<double>(o.time));
      if (o.value > u_) {
        cens_idx_.push_back(-1);
      } else {
        cens_idx_.push_back(static_cast<int>(n_cens_));
        ++n_cens_;
      }
    }
  }
  n_obs_ = x_.size();
  for (auto* mix : {&state_mix_, &scratch_mix_}) {
    mix->means.resize(n_obs_, 0.0);
    mix->factors = std::make_shared<FactorSet>();
  }
  for (auto* mc : {&state_marg_, &scratch_marg_}) {
    mc->lam.resize(n_obs_, 0.0);
    mc->surv.resize(n_obs_, 0.0);
    mc->jac_pow.resize(n_obs_, 0.0);
    mc->target.resize(n_obs_, 0.0);
  }
}

void LikelihoodEngine::fill_means(MixtureState& mix, const inference::Theta& th) const {
  for (std::size_t i = 0; i < n_sub_; ++i)
    for (std::size_t j = sub_first_[i]; j < sub_first_[i + 1]; ++j)
      mix.means[j] = latent::mean_fn(th.subjects[i], th.population, births_[i], t_days_[j]);
  mix.nu = th.population.nu;
}

std::shared_ptr<const LikelihoodEngine::FactorSet> LikelihoodEngine::make_factors(const inference::Theta& th) const {
  auto fs = std::make_shared<FactorSet>();
  fs->chol_l.resize(n_sub_);
  fs->logdet.resize(n_sub_, 0.0);
  for (std::size_t i = 0; i < n_sub_; ++i) {
    Eigen::MatrixXd corr = latent::correlation_matrix(th.kernel, sub_times_[i]);
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
      throw numeric_error("likelihood: Cholesky failed after jitter for subject index " + std::to_string(i));
    fs->chol_l[i] = llt.matrixL();
    double ld = 0.0;
    for (Eigen::Index k = 0; k < fs->chol_l[i].rows(); ++k) ld += std::log(fs->chol_l[i](k, k));
    fs->logdet[i] = 2.0 * ld;
  }
  return fs;
}

bool LikelihoodEngine::fill_marginal(MarginalCols& mc, const inference::Theta& th, const std::vector<double>& v) const {
  const double xi = th.marginal.gpd.xi;
  const double sigma = th.marginal.gpd.sigma_u;
  const bool xi_tiny = std::fabs(xi) < dist::kXiTiny;
  for (std::size_t j = 0; j < n_obs_; ++j) {
    const double lam = marginal::lambda_u(th.marginal.rate, t_years_[j]);
    mc.lam[j] = lam;
    if (cens_idx_[j] < 0) {
      const double w = (x_[j] - u_) / sigma;
      if (xi_tiny) {
        mc.surv[j] = std::exp(-w);
        mc.jac_pow[j] = -w;
      } else {
        const double t = 1.0 + xi * w;
        if (t <= 0.0) return false;  // observation beyond the candidate endpoint
        const double lt = std::log(t);
        mc.surv[j] = std::exp(-lt / xi);
        mc.jac_pow[j] = (-1.0 / xi - 1.0) * lt;
      }
      mc.target[j] = 1.0 - lam * mc.surv[j];
    } else {
      mc.target[j] = (1.0 - lam) * v[static_cast<std::size_t>(cens_idx_[j])];
    }
  }
  return true;
}

double LikelihoodEngine::finish(const MarginalCols& mc, const MixtureState& mix, const inference::Theta& th,
                                double log_prior_value) {
  const double log_sigma = std::log(th.marginal.gpd.sigma_u);
  const double log_nu = std::log(mix.nu);
  const auto& table = mix.table;

  double jac_sum = 0.0;
  work_.resize(n_obs_);
  std::vector<double>& z = work_;
  for (std::size_t j = 0; j < n_obs_; ++j) {
    std::size_t idx = 0;
    if (!table.invert(mc.target[j], idx)) {
      ++domain_failures_;
      return kNegInf;
    }
    z[j] = table.node(idx);
    double gz = table.pdf(idx);
    if (gz < marginal::kPdfFloor) {
      gz = marginal::kPdfFloor;
      ++pdf_floor_hits_;
    }
    if (cens_idx_[j] < 0)
      jac_sum += std::log(mc.lam[j]) + mc.jac_pow[j] - log_sigma - std::log(gz);
    else
      jac_sum += std::log1p(-mc.lam[j]) - std::log(gz);
  }

  double latent_sum = 0.0;
  const auto& fs = *mix.factors;
  for (std::size_t i = 0; i < n_sub_; ++i) {
    const std::size_t n_i = sub_first_[i + 1] - sub_first_[i];
    if (n_i == 0) continue;
    Eigen::VectorXd centred(static_cast<Eigen::Index>(n_i));
    for (std::size_t j = 0; j < n_i; ++j) {
      const std::size_t o = sub_first_[i] + j;
      centred(static_cast<Eigen::Index>(j)) = (z[o] - mix.means[o]) / mix.nu;
    }
    fs.chol_l[i].triangularView<Eigen::Lower>().solveInPlace(centred);
    latent_sum += -0.5 * (static_cast<double>(n_i) * kLogTwoPi + fs.logdet[i]) -
                  static_cast<double>(n_i) * log_nu - 0.5 * centred.squaredNorm();
  }
  return log_prior_value + latent_sum + jac_sum;
}

double LikelihoodEngine::reset(const inference::Theta& th, const std::vector<double>& v) {
  if (v.size() != n_cens_) throw numeric_error("likelihood: auxiliary vector does not cover the censored set");
  state_theta_ = th;
  state_v_ = v;
  const double lp = inference::log_prior(th);
  if (!std::isfinite(lp)) {
    state_lp_ = kNegInf;
    return state_lp_;
  }
  fill_means(state_mix_, th);
  if (n_obs_ > 0) state_mix_.table.rebuild(state_mix_.means, th.population.nu);
  state_mix_.factors = make_factors(th);
  if (!fill_marginal(state_marg_, th, v)) {
    state_lp_ = kNegInf;
    return state_lp_;
  }
  state_lp_ = (n_obs_ > 0) ? finish(state_marg_, state_mix_, th, lp) : lp;
  return state_lp_;
}

double LikelihoodEngine::propose(const inference::Theta& cand, const std::vector<double>& v, UpdateKind kind,
                                 std::size_t subject_idx) {
  cand_kind_ = kind;
  cand_theta_ = cand;
  cand_v_ = v;
  const double lp = inference::log_prior(cand);
  if (!std::isfinite(lp)) {
    cand_lp_ = kNegInf;
    return cand_lp_;
  }
  if (n_obs_ == 0) {
    cand_lp_ = lp;
    return cand_lp_;
  }
  switch (kind) {
    case UpdateKind::Marginal: {
      if (!fill_marginal(scratch_marg_, cand, v)) {
        cand_lp_ = kNegInf;
        return cand_lp_;
      }
      cand_lp_ = finish(scratch_marg_, state_mix_, cand, lp);
      break;
    }
    case UpdateKind::Aux: {
      scratch_marg_ = state_marg_;
      for (std::size_t j = 0; j < n_obs_; ++j)
        if (cens_idx_[j] >= 0)
          scratch_marg_.target[j] = (1.0 - scratch_marg_.lam[j]) * v[static_cast<std::size_t>(cens_idx_[j])];
      cand_lp_ = finish(scratch_marg_, state_mix_, cand, lp);
      break;
    }
    case UpdateKind::Population: {
      fill_means(scratch_mix_, cand);
      scratch_mix_.table.rebuild(scratch_mix_.means, cand.population.nu);
      scratch_mix_.factors = make_factors(cand);
      cand_lp_ = finish(state_marg_, scratch_mix_, cand, lp);
      break;
    }
    case UpdateKind::Subject: {
      scratch_mix_ = state_mix_;
      const std::size_t lo = sub_first_[subject_idx], hi = sub_first_[subject_idx + 1];
      std::vector<double> old_means(state_mix_.means.begin() + static_cast<std::ptrdiff_t>(lo),
                                    state_mix_.means.begin() + static_cast<std::ptrdiff_t>(hi));
      for (std::size_t j = lo; j < hi; ++j)
        scratch_mix_.means[j] = latent::mean_fn(cand.subjects[subject_idx], cand.population, births_[subject_idx],
                                                t_days_[j]);
      std::vector<double> new_means(scratch_mix_.means.begin() + static_cast<std::ptrdiff_t>(lo),
                                    scratch_mix_.means.begin() + static_cast<std::ptrdiff_t>(hi));
      scratch_mix_.table.swap_components(old_means, new_means);
      cand_lp_ = finish(state_marg_, scratch_mix_, cand, lp);
      break;
    }
  }
  return cand_lp_;
}

void LikelihoodEngine::accept() {
  switch (cand_kind_) {
    case UpdateKind::Marginal:
    case UpdateKind::Aux:
      std::swap(state_marg_, scratch_marg_);
      break;
    case UpdateKind::Population:
    case UpdateKind::Subject:
      std::swap(state_mix_, scratch_mix_);
      break;
  }
  state_theta_ = cand_theta_;
  state_v_ = cand_v_;
  state_lp_ = cand_lp_;
}

}  // namespace longtail::detail
