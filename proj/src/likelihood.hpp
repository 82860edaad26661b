#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "grid_table.hpp"
#include "longtail/data.hpp"
#include "longtail/inference.hpp"

namespace longtail::detail {

enum class UpdateKind { Marginal, Population, Subject, Aux };

/// Stateful evaluator of log prior + log likelihood built for blocked MH.
/// The latent-mixture grid tables and per-subject Cholesky factors persist
/// across proposals and are only recomputed where a proposal touches them:
/// full rebuild for population/kernel moves, component swaps for one
/// subject's move, nothing for marginal or auxiliary moves. Semantics match
/// inference::log_posterior.
class LikelihoodEngine {
 public:
  LikelihoodEngine(const data::Dataset& d, const dist::GridSpec& g);

  /// Full state rebuild at (theta, v); returns the log posterior.
  double reset(const inference::Theta& th, const std::vector<double>& v);
  double state_logpost() const { return state_lp_; }

  /// Evaluates a candidate without disturbing the state. `subject_idx` is
  /// only read for UpdateKind::Subject.
  double propose(const inference::Theta& cand, const std::vector<double>& v, UpdateKind kind, std::size_t subject_idx);
  /// Adopts the last proposed candidate.
  void accept();

  std::size_t n_censored() const { return n_cens_; }
  std::size_t n_obs() const { return n_obs_; }
  long domain_failures() const { return domain_failures_; }
  long pdf_floor_hits() const { return pdf_floor_hits_; }

 private:
  struct FactorSet {
    std::vector<Eigen::MatrixXd> chol_l;  // per subject: lower factor of the correlation
    std::vector<double> logdet;           // per subject: log det of the correlation
  };
  struct MixtureState {
    std::vector<double> means;  // per obs
    GridTable table;
    std::shared_ptr<const FactorSet> factors;
    double nu = 1.0;
    explicit MixtureState(const dist::GridSpec& g) : table(g) {}
  };
  struct MarginalCols {
    std::vector<double> lam;      // per obs
    std::vector<double> surv;     // per obs (above slots)
    std::vector<double> jac_pow;  // per obs (above slots): (-1/xi - 1) log1p(xi w)
    std::vector<double> target;   // per obs
  };

  void fill_means(MixtureState& mix, const inference::Theta& th) const;
  std::shared_ptr<const FactorSet> make_factors(const inference::Theta& th) const;
  bool fill_marginal(MarginalCols& mc, const inference::Theta& th, const std::vector<double>& v) const;
  double finish(const MarginalCols& mc, const MixtureState& mix, const inference::Theta& th, double log_prior_value);

  // flattened dataset
  std::size_t n_sub_ = 0, n_obs_ = 0, n_cens_ = 0;
  std::vector<std::size_t> sub_first_;  // n_sub + 1 offsets
  std::vector<double> t_days_, t_years_, x_;
  std::vector<std::int64_t> births_;
  std::vector<int> cens_idx_;  // per obs: slot in v, or -1
  std::vector<std::vector<double>> sub_times_;
  double u_ = 0.0;

  MixtureState state_mix_, scratch_mix_;
  MarginalCols state_marg_, scratch_marg_;
  inference::Theta state_theta_;
  std::vector<double> state_v_;
  double state_lp_ = 0.0;

  double cand_lp_ = 0.0;
  UpdateKind cand_kind_ = UpdateKind::Aux;
  inference::Theta cand_theta_;
  std::vector<double> cand_v_;

  mutable std::vector<double> work_;  // quadform workspace

  long domain_failures_ = 0;
  long pdf_floor_hits_ = 0;
};

}  // namespace longtail::detail
