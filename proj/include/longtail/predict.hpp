#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "longtail/data.hpp"
#include "longtail/inference.hpp"

namespace longtail::predict {

// ---------------------------------------------------------------------------
// Forward simulation of the full model (synthetic datasets)
// ---------------------------------------------------------------------------

struct Window {
  std::int64_t t0_days;
  std::int64_t t1_days;
};

struct SynthParams {
  marginal::MarginalParams marginal;
  latent::PopulationEffects population;
  latent::KernelParams kernel;
  std::size_t n_subjects = 30;
  double obs_rate_per_year = 5.0;  // Poisson observation intensity
  Window window{0, 0};
  double age_lo = 15.0, age_hi = 30.0;  // age at window start
};

struct SynthResult {
  data::Dataset dataset;  // unfiltered; sub-threshold rows carry the sentinel value u
  std::vector<latent::SubjectEffects> effects;
  std::vector<std::vector<double>> latent_values;  // per subject, per observation
};

/// Draws subject effects and observation schedules, simulates latent paths,
/// and maps them to the observed scale through the mixture built from the
/// realized design. Values at or below u are emitted at the sentinel u (they
/// carry no modelled magnitude).
SynthResult synthesize_dataset(const SynthParams& sp, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Future-window simulation across the three subject groups
// ---------------------------------------------------------------------------

struct FutureWindow {
  std::int64_t t_max;
  double horizon_years;  // T > 0
};

struct PoolSubject {
  std::string id;
  std::int64_t birth_date;
  double omega;  // responses / year
};

struct FuturePopulationConfig {
  double r_data = -1.0;  // new-subject arrivals/year; < 0 derives the default
  double psi = 0.5;      // rate dispersion of new subjects
  double s_t = 0.0;      // population volume, responses/year (analytics only)
  double recent_fraction = 0.2;  // "recent activity" cutoff for current subjects
  /// Empirical measurement rates of retained subjects; missing entries are
  /// derived (count / active span, floored at 1/year).
  std::map<std::string, double> per_subject_rates;
  /// Database subjects that never exceeded the threshold (the candidate pool
  /// for first-exceedance subjects).
  std::vector<PoolSubject> f_pool;
  /// Birth dates to resample covariates for brand-new subjects; defaults to
  /// the retained subjects' birth dates.
  std::vector<std::int64_t> covariate_pool;
};

enum class Tag { current, first_exceed, brand_new };

struct Candidate {
  Tag tag;
  std::string id;  // subject id for current, synthetic label otherwise
  std::vector<double> times_days;
  std::vector<double> values;  // post-sign units, above u only
};

struct Replicate {
  std::vector<Candidate> candidates;
  std::size_t draw_index;
};

struct PredictiveSample {
  std::vector<Replicate> replicates;
  double threshold_u = 0.0;
  std::int64_t t_max = 0;
};

/// Per replicate and posterior draw: current subjects conditioned on their
/// past latent values, first-exceedance subjects forward-simulated with their
/// real covariates, and Poisson-arriving new subjects with log-normal rates.
/// A candidate joins its group only if its window maximum exceeds u.
PredictiveSample simulate_future(const std::vector<inference::Theta>& draws, const data::Dataset& d,
                                 const FutureWindow& fw, const FuturePopulationConfig& cfg, const dist::GridSpec& g,
                                 std::size_t n_replicates, std::uint64_t seed);

/// Empirical measurement rate per retained subject: observation count over
/// the active span in years, floored at one observation/year.
std::map<std::string, double> subject_rates(const data::Dataset& d);

// ---------------------------------------------------------------------------
// Record events
// ---------------------------------------------------------------------------

struct EventSummary {
  /// First-breach probability keyed by "current:<id>", "first", "new".
  std::map<std::string, double> p_first_record;
  double p_no_breach = 1.0;
  /// Calendar-year histograms of the first breach, per key.
  std::map<std::string, std::map<int, double>> first_record_year_hist;
  /// Window-maximum (PB) quantiles per current subject: 2.5/25/50/75/97.5%.
  std::map<std::string, std::array<double, 5>> pb_quantiles;
  /// Fraction of replicates in which the subject produced any retained value.
  std::map<std::string, double> pb_presence;
};

EventSummary record_event_probs(const PredictiveSample& ps, double record_r);

/// Closed forms for the next-record law: sigma_r = sigma_u + xi (r - u),
/// E[X_r+] = r + sigma_r/(1 - xi), x_H = u - sigma_u/xi, and the breach rate
/// lambda_r(t) = s_t lambda_u(t) [1 + xi (r-u)/sigma_u]^(-1/xi).
struct RecordAnalytics {
  double sigma_r;
  double expected_next_record;
  double ultimate_endpoint;
  double lambda_r;
};
RecordAnalytics record_analytics(const marginal::MarginalParams& mp, double r, double s_t, double t_years);

// ---------------------------------------------------------------------------
// Analytic record probability under the idealized assumptions
// ---------------------------------------------------------------------------

struct ScheduleEntry {
  double alpha;  // constant latent mean
  double nu;     // latent sd
  double count;  // |future schedule|
};

/// P(target subject sets and holds the record past latent level r_z), by
/// closed-form product plus adaptive Simpson quadrature on the competitor
/// maximum's density; absolute tolerance tol.
double analytic_record_prob(const std::vector<ScheduleEntry>& subjects, double r_z, std::size_t target,
                            double tol = 1e-8);

// ---------------------------------------------------------------------------
// Posterior-predictive diagnostics at observed dates
// ---------------------------------------------------------------------------

struct PredictiveAtDates {
  /// Flattened (subject-major) per-observation predictive samples, original
  /// units.
  std::vector<std::vector<double>> samples;
};

PredictiveAtDates posterior_predictive_at_dates(const std::vector<inference::Theta>& draws, const data::Dataset& d,
                                                const dist::GridSpec& g, std::size_t n_rep, std::uint64_t seed);

}  // namespace longtail::predict
