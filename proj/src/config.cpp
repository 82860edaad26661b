#include "longtail/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "longtail/errors.hpp"

namespace longtail::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: bad numeric value for '" + key + "': '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: bad integer value for '" + key + "': '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error("config: bad boolean value for '" + key + "': '" + v + "'");
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "data") {
    cfg.data = value;
  } else if (key == "sign_flip") {
    cfg.sign_flip = to_bool(key, value);
  } else if (key == "threshold_u") {
    cfg.threshold_u = to_double(key, value);
  } else if (key == "min_obs") {
    cfg.min_obs = to_long(key, value);
  } else if (key == "grid_lo") {
    cfg.grid_lo = to_double(key, value);
  } else if (key == "grid_hi") {
    cfg.grid_hi = to_double(key, value);
  } else if (key == "grid_count") {
    cfg.grid_count = to_long(key, value);
  } else if (key == "chains") {
    cfg.chains = to_long(key, value);
  } else if (key == "iterations") {
    cfg.iterations = to_long(key, value);
  } else if (key == "burn_in") {
    cfg.burn_in = to_long(key, value);
  } else if (key == "thin") {
    cfg.thin = to_long(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    cfg.seed_set = true;
  } else if (key == "hpdi_level") {
    cfg.hpdi_level = to_double(key, value);
  } else if (key == "v_alpha") {
    cfg.v_alpha = to_double(key, value);
  } else if (key == "aux_refreshes") {
    cfg.aux_refreshes = to_long(key, value);
  } else if (key == "max_threads") {
    cfg.max_threads = to_long(key, value);
  } else if (key == "fit_dir") {
    cfg.fit_dir = value;
  } else if (key == "horizon_years") {
    cfg.horizon_years = to_double(key, value);
  } else if (key == "psi") {
    cfg.psi = to_double(key, value);
  } else if (key == "r_data") {
    cfg.r_data = to_double(key, value);
  } else if (key == "recent_fraction") {
    cfg.recent_fraction = to_double(key, value);
  } else if (key == "record_r") {
    cfg.record_r = to_double(key, value);
  } else if (key == "s_t") {
    cfg.s_t = to_double(key, value);
  } else if (key == "replicates") {
    cfg.replicates = to_long(key, value);
  } else if (key == "predictive_rep") {
    cfg.predictive_rep = to_long(key, value);
  } else if (key == "synth_start") {
    cfg.synth_start = value;
  } else if (key == "synth_years") {
    cfg.synth_years = to_double(key, value);
  } else if (key == "synth_subjects") {
    cfg.synth_subjects = to_long(key, value);
  } else if (key == "synth_obs_rate") {
    cfg.synth_obs_rate = to_double(key, value);
  } else if (key == "synth_xi") {
    cfg.synth_xi = to_double(key, value);
  } else if (key == "synth_sigma_u") {
    cfg.synth_sigma_u = to_double(key, value);
  } else if (key == "synth_beta0") {
    cfg.synth_beta0 = to_double(key, value);
  } else if (key == "synth_beta1") {
    cfg.synth_beta1 = to_double(key, value);
  } else if (key == "synth_gamma") {
    cfg.synth_gamma = to_double(key, value);
  } else if (key == "synth_nu") {
    cfg.synth_nu = to_double(key, value);
  } else if (key == "synth_kappa0") {
    cfg.synth_kappa0 = to_double(key, value);
  } else if (key == "synth_kappa1") {
    cfg.synth_kappa1 = to_double(key, value);
  } else if (key == "measure_rho") {
    cfg.measure_rho = to_double(key, value);
  } else if (key == "measure_q") {
    cfg.measure_q = to_double(key, value);
  } else if (key == "measure_pairs") {
    cfg.measure_pairs = to_long(key, value);
  } else if (key == "measure_delta") {
    cfg.measure_delta = to_double(key, value);
  } else if (key == "measure_n") {
    cfg.measure_n = to_long(key, value);
  } else if (key == "measure_reps") {
    cfg.measure_reps = to_long(key, value);
  } else {
    throw config_error("config: unknown key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: line " + std::to_string(line_no) + " is not 'key = value'");
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string manifest_json(const RunConfig& cfg, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kVersion;
  nlohmann::json c;
  c["data"] = cfg.data;
  c["sign_flip"] = cfg.sign_flip;
  c["threshold_u"] = cfg.threshold_u;
  c["min_obs"] = cfg.min_obs;
  c["grid_lo"] = std::isnan(cfg.grid_lo) ? nlohmann::json("auto") : nlohmann::json(cfg.grid_lo);
  c["grid_hi"] = std::isnan(cfg.grid_hi) ? nlohmann::json("auto") : nlohmann::json(cfg.grid_hi);
  c["grid_count"] = cfg.grid_count;
  c["chains"] = cfg.chains;
  c["iterations"] = cfg.iterations;
  c["burn_in"] = cfg.burn_in;
  c["thin"] = cfg.thin;
  c["seed"] = cfg.seed;
  c["hpdi_level"] = cfg.hpdi_level;
  c["v_alpha"] = cfg.v_alpha;
  c["aux_refreshes"] = cfg.aux_refreshes;
  c["max_threads"] = cfg.max_threads;
  c["fit_dir"] = cfg.fit_dir;
  c["horizon_years"] = cfg.horizon_years;
  c["psi"] = cfg.psi;
  c["r_data"] = cfg.r_data;
  c["recent_fraction"] = cfg.recent_fraction;
  c["record_r"] = std::isnan(cfg.record_r) ? nlohmann::json("auto") : nlohmann::json(cfg.record_r);
  c["s_t"] = cfg.s_t;
  c["replicates"] = cfg.replicates;
  c["predictive_rep"] = cfg.predictive_rep;
  c["synth_start"] = cfg.synth_start;
  c["synth_years"] = cfg.synth_years;
  c["synth_subjects"] = cfg.synth_subjects;
  c["synth_obs_rate"] = cfg.synth_obs_rate;
  c["synth_xi"] = cfg.synth_xi;
  c["synth_sigma_u"] = cfg.synth_sigma_u;
  c["synth_beta0"] = cfg.synth_beta0;
  c["synth_beta1"] = cfg.synth_beta1;
  c["synth_gamma"] = cfg.synth_gamma;
  c["synth_nu"] = cfg.synth_nu;
  c["synth_kappa0"] = cfg.synth_kappa0;
  c["synth_kappa1"] = cfg.synth_kappa1;
  c["measure_rho"] = cfg.measure_rho;
  c["measure_q"] = cfg.measure_q;
  c["measure_pairs"] = cfg.measure_pairs;
  c["measure_delta"] = cfg.measure_delta;
  c["measure_n"] = cfg.measure_n;
  c["measure_reps"] = cfg.measure_reps;
  j["config"] = c;
  return j.dump(2);
}

}  // namespace longtail::cli
