#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "longtail/config.hpp"
#include "longtail/data.hpp"
#include "longtail/deplab.hpp"
#include "longtail/errors.hpp"
#include "longtail/inference.hpp"
#include "longtail/predict.hpp"

namespace fs = std::filesystem;
using namespace longtail;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitDiagnostics = 5;

struct Cli {
  std::string config_path;
  std::string data_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

cli::RunConfig resolve(const Cli& c) {
  cli::RunConfig cfg;
  if (!c.config_path.empty()) cfg = cli::load_config(c.config_path);
  if (!c.data_path.empty()) cfg.data = c.data_path;
  if (c.seed_given) {
    cfg.seed = c.seed;
    cfg.seed_set = true;
  }
  if (!cfg.seed_set) throw config_error("config: seed is mandatory (config key 'seed' or --seed)");
  return cfg;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw data_error("cannot write '" + p.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

fs::path make_out_dir(const std::string& out) {
  if (out.empty()) throw config_error("config: --out is required for this subcommand");
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create output directory '" + out + "'");
  return dir;
}

dist::GridSpec resolved_grid(const cli::RunConfig& cfg) {
  double lo = cfg.grid_lo, hi = cfg.grid_hi;
  if (std::isnan(lo)) lo = -(6.0 * cfg.v_alpha + 16.0);
  if (std::isnan(hi)) hi = 6.0 * cfg.v_alpha + 8.0;
  if (!(lo < hi) || cfg.grid_count < 2) throw config_error("config: invalid grid specification");
  return dist::GridSpec{lo, hi, static_cast<std::size_t>(cfg.grid_count)};
}

data::Dataset load_and_filter(const cli::RunConfig& cfg) {
  if (cfg.data.empty()) throw config_error("config: data path is required (config key 'data' or --data)");
  const auto raw = data::ingest_csv(cfg.data, cfg.sign_flip);
  return data::preprocess(raw, cfg.threshold_u, static_cast<std::size_t>(cfg.min_obs));
}

inference::McmcConfig mcmc_config(const cli::RunConfig& cfg) {
  inference::McmcConfig mc;
  mc.chains = static_cast<int>(cfg.chains);
  mc.iters = cfg.iterations;
  mc.burn_in = cfg.burn_in;
  mc.thin = static_cast<int>(cfg.thin);
  mc.seed = cfg.seed;
  mc.aux_refreshes = static_cast<int>(cfg.aux_refreshes);
  mc.max_threads = static_cast<int>(cfg.max_threads);
  mc.v_alpha = cfg.v_alpha;
  return mc;
}

int cmd_fit(const cli::RunConfig& cfg, const std::string& out) {
  const auto dir = make_out_dir(out);
  const auto d = load_and_filter(cfg);
  const auto g = resolved_grid(cfg);
  const auto trace = inference::run_mcmc(d, g, mcmc_config(cfg));
  const auto summary = inference::diagnostics(trace, cfg.hpdi_level);
  inference::write_trace_csv(trace, (dir / "trace.csv").string());
  inference::write_summary_json(summary, (dir / "summary.json").string());
  write_text(dir / "manifest.json", cli::manifest_json(cfg, "fit"));
  std::printf("fit: %zu chains x %zu draws -> %s\n", trace.n_chains(), trace.n_draws(), dir.string().c_str());
  return 0;
}

double default_record(const data::Dataset& d) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : d.subjects)
    for (const auto& o : s.observations) best = std::max(best, o.value);
  return best;
}

double default_s_t(const data::Dataset& d) {
  // observations in the final observed year
  std::size_t n = 0;
  for (const auto& s : d.subjects)
    for (const auto& o : s.observations)
      if (static_cast<double>(d.t_max - o.time) <= data::kDaysPerYear) ++n;
  return static_cast<double>(n);
}

int cmd_predict(const cli::RunConfig& cfg, const std::string& out) {
  const auto dir = make_out_dir(out);
  if (cfg.fit_dir.empty()) throw config_error("config: fit_dir is required for predict");
  const auto trace = inference::read_trace_csv((fs::path(cfg.fit_dir) / "trace.csv").string());
  const auto d = load_and_filter(cfg);
  const auto g = resolved_grid(cfg);
  const auto draws = inference::draws_from_trace(trace, cfg.threshold_u, cfg.v_alpha);

  predict::FutureWindow fw{d.t_max, cfg.horizon_years};
  predict::FuturePopulationConfig pc;
  pc.r_data = cfg.r_data;
  pc.psi = cfg.psi;
  pc.recent_fraction = cfg.recent_fraction;
  pc.s_t = cfg.s_t >= 0.0 ? cfg.s_t : default_s_t(d);
  const auto ps = predict::simulate_future(draws, d, fw, pc, g, static_cast<std::size_t>(cfg.replicates), cfg.seed);
  const double record_r = std::isnan(cfg.record_r) ? default_record(d) : cfg.record_r;
  const auto events = predict::record_event_probs(ps, record_r);

  std::FILE* f = std::fopen((dir / "predictive.csv").string().c_str(), "w");
  if (!f) throw data_error("cannot write predictive.csv");
  std::fputs("replicate,draw,subject_tag,time_days,value\n", f);
  for (std::size_t r = 0; r < ps.replicates.size(); ++r)
    for (const auto& c : ps.replicates[r].candidates) {
      const std::string tag =
          (c.tag == predict::Tag::current) ? "current:" + c.id : (c.tag == predict::Tag::first_exceed ? "first" : "new");
      for (std::size_t j = 0; j < c.values.size(); ++j)
        std::fprintf(f, "%zu,%zu,%s,%.17g,%.17g\n", r, ps.replicates[r].draw_index, tag.c_str(), c.times_days[j],
                     c.values[j]);
    }
  std::fclose(f);

  nlohmann::json ev;
  ev["record_r"] = record_r;
  ev["p_no_breach"] = events.p_no_breach;
  for (const auto& [key, p] : events.p_first_record) ev["p_first_record"][key] = p;
  for (const auto& [key, hist] : events.first_record_year_hist)
    for (const auto& [year, p] : hist) ev["first_record_year_hist"][key][std::to_string(year)] = p;
  for (const auto& [id, q] : events.pb_quantiles)
    ev["pb_quantiles"][id] = {q[0], q[1], q[2], q[3], q[4]};
  for (const auto& [id, p] : events.pb_presence) ev["pb_presence"][id] = p;
  // closed-form record analytics per posterior draw, summarised
  {
    std::vector<double> sr, ex, xh;
    const double t_end = d.t_years(d.t_max);
    for (const auto& th : draws) {
      try {
        const auto ra = predict::record_analytics(th.marginal, record_r, pc.s_t, t_end);
        sr.push_back(ra.sigma_r);
        ex.push_back(ra.expected_next_record);
        xh.push_back(ra.ultimate_endpoint);
      } catch (const numeric_error&) {
      }
    }
    auto mean_of = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (const double x : v) acc += x;
      return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    ev["analytics"] = {{"sigma_r_mean", mean_of(sr)},
                       {"expected_next_record_mean", mean_of(ex)},
                       {"ultimate_endpoint_mean", mean_of(xh)},
                       {"draws_used", sr.size()}};
  }
  write_text(dir / "events.json", ev.dump(2));
  write_text(dir / "manifest.json", cli::manifest_json(cfg, "predict"));
  std::printf("predict: %zu replicates -> %s\n", ps.replicates.size(), dir.string().c_str());
  return 0;
}

int cmd_synth(const cli::RunConfig& cfg, const std::string& out) {
  if (out.empty()) throw config_error("config: --out is required for synth");
  predict::SynthParams sp;
  sp.marginal.gpd = {cfg.threshold_u, cfg.synth_sigma_u, cfg.synth_xi};
  sp.marginal.rate = {cfg.synth_beta0, cfg.synth_beta1};
  sp.population.gamma = cfg.synth_gamma;
  sp.population.nu = cfg.synth_nu;
  sp.population.v_alpha = cfg.v_alpha;
  sp.kernel = {cfg.synth_kappa0, cfg.synth_kappa1};
  sp.n_subjects = static_cast<std::size_t>(cfg.synth_subjects);
  sp.obs_rate_per_year = cfg.synth_obs_rate;
  const std::int64_t t0 = data::parse_date(cfg.synth_start);
  sp.window = {t0, t0 + static_cast<std::int64_t>(std::llround(cfg.synth_years * data::kDaysPerYear))};
  const auto synth = predict::synthesize_dataset(sp, cfg.seed);

  std::FILE* f = std::fopen(out.c_str(), "w");
  if (!f) throw data_error("cannot write '" + out + "'");
  std::fputs("subject_id,date,value,birth_date\n", f);
  for (const auto& s : synth.dataset.subjects)
    for (const auto& o : s.observations)
      std::fprintf(f, "%s,%s,%.17g,%s\n", s.id.c_str(), data::format_date(o.time).c_str(),
                   cfg.sign_flip ? -o.value : o.value, data::format_date(s.birth_date).c_str());
  std::fclose(f);
  const fs::path manifest = fs::path(out).parent_path() / (fs::path(out).stem().string() + ".manifest.json");
  write_text(manifest, cli::manifest_json(cfg, "synth"));
  std::printf("synth: %zu subjects, %zu observations -> %s\n", synth.dataset.n_subjects(), synth.dataset.n_obs(),
              out.c_str());
  return 0;
}

int cmd_measure(const cli::RunConfig& cfg, const std::string& out) {
  const auto dir = make_out_dir(out);
  std::FILE* f = std::fopen((dir / "measures.csv").string().c_str(), "w");
  if (!f) throw data_error("cannot write measures.csv");
  std::fputs("quantity,q_or_n,estimate,se,analytic\n", f);

  const auto pairs = deplab::gaussian_copula_sample(cfg.measure_rho, static_cast<std::size_t>(cfg.measure_pairs),
                                                    rng::substream(cfg.seed, "measure-pairs", 0));
  for (const double q : {0.9, 0.99, cfg.measure_q}) {
    const auto est = deplab::chi_chibar(pairs, q);
    std::fprintf(f, "chi,%.17g,%.17g,%.17g,%.17g\n", q, est.chi, est.chi_se, 0.0);
    std::fprintf(f, "chibar,%.17g,%.17g,%.17g,%.17g\n", q, est.chibar, est.chibar_se, cfg.measure_rho);
  }

  for (const double delta : {0.0, cfg.measure_delta})
    for (const double rho : {0.0, cfg.measure_rho}) {
      const auto cl = deplab::conditional_limit(delta, rho, static_cast<std::size_t>(cfg.measure_n),
                                                static_cast<std::size_t>(cfg.measure_reps),
                                                rng::substream(cfg.seed, "measure-cond", 0));
      std::fprintf(f, "conditional_limit_d%.3g_r%.3g,%ld,%.17g,%.17g,%.17g\n", delta, rho, cfg.measure_n, cl.estimate,
                   cl.se, cl.analytic);
    }

  for (const long n : {100L, 1000L, cfg.measure_n}) {
    deplab::LimitExperiment ex;
    ex.n = static_cast<std::size_t>(n);
    ex.rho = cfg.measure_rho;
    ex.replications = static_cast<std::size_t>(cfg.measure_reps);
    ex.seed = rng::substream(cfg.seed, "measure-max", static_cast<std::uint64_t>(n));
    ex.growth_case = 1;
    auto r1 = deplab::maxima_limit(ex);
    std::fprintf(f, "maxima_case1_origin,%ld,%.17g,%.17g,%.17g\n", n, r1.at_origin, r1.at_origin_se,
                 r1.limit_at_origin);
    ex.growth_case = 2;
    auto r2 = deplab::maxima_limit(ex);
    std::fprintf(f, "maxima_case2_gumbel_ks,%ld,%.17g,%.17g,%.17g\n", n, r2.marginal_ks, 0.0, 0.0);
  }
  std::fclose(f);
  write_text(dir / "manifest.json", cli::manifest_json(cfg, "measure"));
  std::printf("measure -> %s\n", dir.string().c_str());
  return 0;
}

int cmd_diagnose(const cli::RunConfig& cfg, const std::string& out) {
  const auto dir = make_out_dir(out);
  if (cfg.fit_dir.empty()) throw config_error("config: fit_dir is required for diagnose");
  const auto trace = inference::read_trace_csv((fs::path(cfg.fit_dir) / "trace.csv").string());
  const auto raw = data::ingest_csv(cfg.data, cfg.sign_flip);
  const auto d = data::preprocess(raw, cfg.threshold_u, static_cast<std::size_t>(cfg.min_obs));
  const auto g = resolved_grid(cfg);
  const auto draws = inference::draws_from_trace(trace, cfg.threshold_u, cfg.v_alpha);
  const auto pp = predict::posterior_predictive_at_dates(draws, d, g, static_cast<std::size_t>(cfg.predictive_rep),
                                                         cfg.seed);

  std::FILE* f = std::fopen((dir / "posterior_predictive.csv").string().c_str(), "w");
  if (!f) throw data_error("cannot write posterior_predictive.csv");
  std::fputs("subject_id,date,observed,sample_index,value\n", f);
  std::size_t flat = 0;
  for (const auto& s : d.subjects)
    for (const auto& o : s.observations) {
      for (std::size_t k = 0; k < pp.samples[flat].size(); ++k)
        std::fprintf(f, "%s,%s,%.17g,%zu,%.17g\n", s.id.c_str(), data::format_date(o.time).c_str(), o.raw_value, k,
                     pp.samples[flat][k]);
      ++flat;
    }
  std::fclose(f);

  const auto km = data::km_curve(raw, cfg.threshold_u);
  std::FILE* kf = std::fopen((dir / "km_curve.csv").string().c_str(), "w");
  if (!kf) throw data_error("cannot write km_curve.csv");
  std::fputs("m,k_m\n", kf);
  for (std::size_t m = 0; m < km.size(); ++m) std::fprintf(kf, "%zu,%zu\n", m, km[m]);
  std::fclose(kf);

  write_text(dir / "manifest.json", cli::manifest_json(cfg, "diagnose"));
  std::printf("diagnose -> %s\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longtail: extremes of longitudinal data"};
  app.require_subcommand(1);

  Cli cli_args;
  std::string subcommand;
  for (const auto& name : {"fit", "predict", "synth", "measure", "diagnose"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", cli_args.config_path, "config file (key = value lines)");
    sub->add_option("--data", cli_args.data_path, "input CSV (overrides config)");
    sub->add_option("--out", cli_args.out_path, "output directory (or file for synth)");
    sub->add_option("--seed", cli_args.seed, "RNG seed (overrides config)")->each([&](const std::string&) {
      cli_args.seed_given = true;
    });
    sub->callback([&, name] { subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto cfg = resolve(cli_args);
    if (subcommand == "fit") return cmd_fit(cfg, cli_args.out_path);
    if (subcommand == "predict") return cmd_predict(cfg, cli_args.out_path);
    if (subcommand == "synth") return cmd_synth(cfg, cli_args.out_path);
    if (subcommand == "measure") return cmd_measure(cfg, cli_args.out_path);
    if (subcommand == "diagnose") return cmd_diagnose(cfg, cli_args.out_path);
    std::cerr << "error: unknown subcommand\n";
    return kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const diagnostics_error& e) {
    std::cerr << "diagnostics error: " << e.what() << "\n";
    return kExitDiagnostics;
  } catch (const numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
