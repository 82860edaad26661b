#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace longtail::cli {

inline constexpr const char* kVersion = "longtail 0.1.0";

/// Resolved run configuration. File format: one `key = value` per line,
/// UTF-8, '#' comments; unknown keys are errors.
struct RunConfig {
  // data
  std::string data;
  bool sign_flip = true;
  double threshold_u = -61.125;
  long min_obs = 7;

  // latent grid; lo/hi NaN means the documented auto rule
  double grid_lo = std::numeric_limits<double>::quiet_NaN();
  double grid_hi = std::numeric_limits<double>::quiet_NaN();
  long grid_count = 2001;

  // sampler
  long chains = 40;
  long iterations = 5000;
  long burn_in = 2500;
  long thin = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double hpdi_level = 0.95;
  double v_alpha = 6.0;
  long aux_refreshes = 1;
  long max_threads = 0;

  // prediction
  std::string fit_dir;
  double horizon_years = 12.0;
  double psi = 0.5;
  double r_data = -1.0;  // <0: derive from data
  double recent_fraction = 0.2;
  double record_r = std::numeric_limits<double>::quiet_NaN();  // NaN: best observed value
  double s_t = -1.0;                                           // <0: observations in the final observed year
  long replicates = 1000;
  long predictive_rep = 400;

  // synthetic data
  std::string synth_start = "2012-01-01";
  double synth_years = 8.0;
  long synth_subjects = 30;
  double synth_obs_rate = 5.0;
  double synth_xi = -0.2;
  double synth_sigma_u = 1.0;
  double synth_beta0 = -0.66;
  double synth_beta1 = 0.13;
  double synth_gamma = 0.02;
  double synth_nu = 1.0;
  double synth_kappa0 = 0.02;
  double synth_kappa1 = 1.0;

  // dependence lab
  double measure_rho = 0.5;
  double measure_q = 0.999;
  long measure_pairs = 10000000;
  double measure_delta = 1.0;
  long measure_n = 10000;
  long measure_reps = 100000;
};

/// Parses a config file; throws config_error for unknown keys or bad values.
RunConfig load_config(const std::string& path);
/// Applies one `key = value` assignment.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Manifest echo of every resolved key.
std::string manifest_json(const RunConfig& cfg, const std::string& command);

}  // namespace longtail::cli
