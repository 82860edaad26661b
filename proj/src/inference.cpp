#include "longtail/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "likelihood.hpp"
#include "longtail/errors.hpp"
#include "mcmc.hpp"

namespace longtail::inference {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogitXiCentre = std::log(4.0);        // logit(0.8)
const double kLogitKappaCentre = -std::log(2.0);    // logit(1/3); mode at kappa1 = 1

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double normal_lpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double gamma_lpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bijections
// ---------------------------------------------------------------------------

std::vector<double> to_unconstrained(const Theta& th) {
  std::vector<double> u;
  u.reserve(8 + 2 * th.subjects.size());
  u.push_back(logit(th.marginal.gpd.xi + 1.0));
  u.push_back(std::log(th.marginal.gpd.sigma_u));
  u.push_back(th.marginal.rate.beta0);
  u.push_back(std::log(th.marginal.rate.beta1));
  u.push_back(std::log(th.population.gamma));
  u.push_back(std::log(th.population.nu));
  u.push_back(std::log(th.kernel.kappa0));
  u.push_back(logit((th.kernel.kappa1 - 0.5) / 1.5));
  for (const auto& se : th.subjects) {
    u.push_back(se.alpha);
    u.push_back(se.tau);
  }
  return u;
}

Theta from_unconstrained(const std::vector<double>& u, double threshold_u, double v_alpha) {
  if (u.size() < 8 || (u.size() - 8) % 2 != 0) throw numeric_error("from_unconstrained: bad parameter count");
  Theta th;
  th.marginal.gpd.u = threshold_u;
  th.marginal.gpd.xi = logistic(u[0]) - 1.0;
  th.marginal.gpd.sigma_u = std::exp(u[1]);
  th.marginal.rate.beta0 = u[2];
  th.marginal.rate.beta1 = std::exp(u[3]);
  th.population.gamma = std::exp(u[4]);
  th.population.nu = std::exp(u[5]);
  th.population.v_alpha = v_alpha;
  th.kernel.kappa0 = std::exp(u[6]);
  th.kernel.kappa1 = 0.5 + 1.5 * logistic(u[7]);
  const std::size_t n_sub = (u.size() - 8) / 2;
  th.subjects.resize(n_sub);
  for (std::size_t i = 0; i < n_sub; ++i) {
    th.subjects[i].alpha = u[8 + 2 * i];
    th.subjects[i].tau = u[9 + 2 * i];
  }
  return th;
}

double bijection_log_jacobian(const std::vector<double>& u) {
  const double s0 = logistic(u[0]);
  const double s7 = logistic(u[7]);
  return std::log(s0 * (1.0 - s0)) + u[1] + u[3] + u[4] + u[5] + u[6] + std::log(1.5 * s7 * (1.0 - s7));
}

std::vector<double> unconstrained_to_constrained(const std::vector<double>& u) {
  std::vector<double> c = u;
  c[0] = logistic(u[0]) - 1.0;
  c[1] = std::exp(u[1]);
  c[3] = std::exp(u[3]);
  c[4] = std::exp(u[4]);
  c[5] = std::exp(u[5]);
  c[6] = std::exp(u[6]);
  c[7] = 0.5 + 1.5 * logistic(u[7]);
  return c;
}

std::vector<double> constrained_to_unconstrained(const std::vector<double>& c) {
  std::vector<double> u = c;
  u[0] = logit(c[0] + 1.0);
  u[1] = std::log(c[1]);
  u[3] = std::log(c[3]);
  u[4] = std::log(c[4]);
  u[5] = std::log(c[5]);
  u[6] = std::log(c[6]);
  u[7] = logit((c[7] - 0.5) / 1.5);
  return u;
}

std::vector<std::string> parameter_names(const data::Dataset& d) {
  std::vector<std::string> names = {"xi", "sigma_u", "beta0", "beta1", "gamma", "nu", "kappa0", "kappa1"};
  for (const auto& s : d.subjects) {
    names.push_back("alpha:" + s.id);
    names.push_back("tau:" + s.id);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Prior
// ---------------------------------------------------------------------------

double log_prior(const Theta& th) {
  const double xi = th.marginal.gpd.xi;
  const double sigma = th.marginal.gpd.sigma_u;
  const auto& pop = th.population;
  const auto& kp = th.kernel;
  if (!(xi > -1.0 && xi < 0.0) || !(sigma > 0.0) || !(th.marginal.rate.beta1 > 0.0) || !(pop.gamma > 0.0) ||
      !(pop.nu > 0.0) || !(kp.kappa0 > 0.0) || !(kp.kappa1 > 0.5 && kp.kappa1 < 2.0))
    return kNegInf;

  double lp = 0.0;
  // shape: logit(xi+1) ~ N(logit 0.8, 0.3), as a density of xi
  lp += normal_lpdf(logit(xi + 1.0), kLogitXiCentre, 0.3) - std::log((1.0 + xi) * (-xi));
  lp += gamma_lpdf(sigma, 25.0, 25.0);
  lp += normal_lpdf(th.marginal.rate.beta0, 0.0, 0.5);
  lp += gamma_lpdf(th.marginal.rate.beta1, 0.1, 0.1);
  for (const auto& se : th.subjects) {
    if (!(se.tau > 0.0)) return kNegInf;
    lp += normal_lpdf(se.alpha, 0.0, pop.v_alpha * pop.v_alpha);
    lp += normal_lpdf(se.tau, 25.0, 2.5 * 2.5);
  }
  lp += gamma_lpdf(pop.gamma, 0.5, 0.5);
  lp += gamma_lpdf(pop.nu, 1.0, 1.0);
  lp += gamma_lpdf(kp.kappa0, 0.5, 0.5);
  const double w = logit((kp.kappa1 - 0.5) / 1.5);
  lp += normal_lpdf(w, kLogitKappaCentre, 2.0) + std::log(1.5 / ((kp.kappa1 - 0.5) * (2.0 - kp.kappa1)));
  return lp;
}

// ---------------------------------------------------------------------------
// Reference posterior
// ---------------------------------------------------------------------------

double log_posterior(const Theta& th, const marginal::AuxBelow& aux, const data::Dataset& d, const dist::GridSpec& g,
                     marginal::EvalDiagnostics* diag) {
  if (th.subjects.size() != d.n_subjects()) throw numeric_error("log_posterior: subject count mismatch");
  const double lp = log_prior(th);
  if (!std::isfinite(lp)) return kNegInf;
  if (d.n_obs() == 0) return lp;

  dist::MixtureMarginal mix;
  mix.components.reserve(d.n_obs());
  for (std::size_t i = 0; i < d.n_subjects(); ++i)
    for (const auto& o : d.subjects[i].observations)
      mix.components.push_back(
          {latent::mean_fn(th.subjects[i], th.population, d.subjects[i].birth_date, static_cast<double>(o.time)),
           th.population.nu});

  std::vector<std::vector<double>> z(d.n_subjects());
  double jac_sum = 0.0;
  std::size_t cens_slot = 0;
  try {
    for (std::size_t i = 0; i < d.n_subjects(); ++i) {
      z[i].reserve(d.subjects[i].n_obs());
      for (const auto& o : d.subjects[i].observations) {
        const double t_years = d.t_years(o.time);
        double zij;
        if (o.value > d.threshold_u) {
          zij = marginal::to_latent_above(th.marginal, mix, g, o.value, t_years);
          const double jac = marginal::jacobian_above(th.marginal, mix, o.value, t_years, zij, diag);
          if (!(jac > 0.0)) return kNegInf;
          jac_sum += std::log(jac);
        } else {
          if (cens_slot >= aux.v.size()) throw numeric_error("log_posterior: auxiliary vector too short");
          const double v = aux.v[cens_slot++];
          zij = marginal::to_latent_below(th.marginal, mix, g, v, t_years);
          jac_sum += std::log(marginal::jacobian_below(th.marginal, mix, v, t_years, zij, diag));
        }
        z[i].push_back(zij);
      }
    }
  } catch (const numeric_error&) {
    if (diag) ++diag->domain_failures;
    return kNegInf;
  }
  if (cens_slot != aux.v.size()) throw numeric_error("log_posterior: auxiliary vector does not cover the censored set");

  const double latent_sum = latent::latent_loglik(d, z, th.subjects, th.population, th.kernel);
  return lp + latent_sum + jac_sum;
}

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

namespace {

Theta draw_prior_theta(const data::Dataset& d, double v_alpha, rng::Engine& rng) {
  Theta th;
  th.marginal.gpd.u = d.threshold_u;
  th.marginal.gpd.xi = logistic(rng.normal(kLogitXiCentre, std::sqrt(0.3))) - 1.0;
  th.marginal.gpd.sigma_u = rng.gamma(25.0, 25.0);
  th.marginal.rate.beta0 = rng.normal(0.0, std::sqrt(0.5));
  th.marginal.rate.beta1 = rng.gamma(0.1, 0.1);
  th.population.gamma = rng.gamma(0.5, 0.5);
  th.population.nu = rng.gamma(1.0, 1.0);
  th.population.v_alpha = v_alpha;
  th.kernel.kappa0 = rng.gamma(0.5, 0.5);
  th.kernel.kappa1 = 0.5 + 1.5 * logistic(rng.normal(kLogitKappaCentre, std::sqrt(2.0)));

  // alpha_i sits at the subject's empirical latent-scale proxy: the best
  // observed value pushed through the marginal at prior-mean parameters and
  // a single Gaussian of the prior's marginal latent spread.
  dist::GpdParams proxy{d.threshold_u, 1.0, -0.2};
  th.subjects.resize(d.n_subjects());
  for (std::size_t i = 0; i < d.n_subjects(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& o : d.subjects[i].observations) best = std::max(best, o.value);
    double p_star = 0.5;
    if (best > d.threshold_u) p_star = std::min(1.0 - 0.5 * (1.0 - dist::gpd_cdf(proxy, best)), 1.0 - 1e-6);
    const double spread = std::sqrt(v_alpha * v_alpha + 1.0);
    const double z_star = dist::norm_quantile(p_star) * spread;
    th.subjects[i].alpha = std::clamp(z_star, -3.0 * v_alpha, 3.0 * v_alpha) + rng.normal(0.0, 0.5);
    double tau = rng.normal(25.0, 2.5);
    while (tau <= 0.0) tau = rng.normal(25.0, 2.5);
    th.subjects[i].tau = tau;
  }
  return th;
}

struct ChainResult {
  std::vector<std::vector<double>> draws;
  double accept_rate = 0.0;
  std::uint64_t seed = 0;
};

ChainResult run_chain(const data::Dataset& d, const dist::GridSpec& g, const McmcConfig& cfg, int chain_idx) {
  ChainResult out;
  out.seed = rng::substream(cfg.seed, "chain", static_cast<std::uint64_t>(chain_idx));
  rng::Engine rng(out.seed);
  detail::LikelihoodEngine engine(d, g);
  const std::size_t n_sub = d.n_subjects();
  const std::size_t n_cens = engine.n_censored();

  Theta th;
  std::vector<double> v(n_cens);
  bool started = false;
  for (int attempt = 0; attempt < 100 && !started; ++attempt) {
    th = draw_prior_theta(d, cfg.v_alpha, rng);
    for (auto& x : v) x = rng.uniform_open();
    started = std::isfinite(engine.reset(th, v));
  }
  if (!started) throw numeric_error("run_mcmc: non-finite initial posterior after 100 prior-draw restarts");

  std::vector<std::vector<int>> blocks;
  blocks.push_back({0, 1, 2, 3});
  blocks.push_back({4, 5, 6, 7});
  for (std::size_t i = 0; i < n_sub; ++i) blocks.push_back({static_cast<int>(8 + 2 * i), static_cast<int>(9 + 2 * i)});

  std::vector<detail::BlockSampler> samplers;
  for (const auto& b : blocks)
    samplers.emplace_back(static_cast<int>(b.size()),
                          b.size() == 1 ? cfg.target_accept_scalar : cfg.target_accept_block);

  std::vector<double> u = to_unconstrained(th);
  std::vector<double> u_cand(u.size());
  std::vector<double> v_cand(n_cens);
  std::vector<double> block_cur, block_out;

  long theta_proposals = 0, theta_accepts = 0;
  for (long t = 0; t < cfg.iters; ++t) {
    const bool adapting = t < cfg.burn_in;

    // Pseudo-marginal refresh: propose a fresh auxiliary vector from its
    // prior; the likelihood ratio alone decides.
    for (int r = 0; r < cfg.aux_refreshes; ++r) {
      if (n_cens == 0) break;
      for (auto& x : v_cand) x = rng.uniform_open();
      const double cand_lp = engine.propose(th, v_cand, detail::UpdateKind::Aux, 0);
      if (std::log(rng.uniform_open()) < cand_lp - engine.state_logpost()) {
        engine.accept();
        v = v_cand;
      }
    }

    for (std::size_t b = 0; b < blocks.size(); ++b) {
      block_cur.clear();
      for (const int k : blocks[b]) block_cur.push_back(u[static_cast<std::size_t>(k)]);
      block_out.assign(blocks[b].size(), 0.0);
      samplers[b].propose(block_cur.data(), block_out.data(), rng);
      u_cand = u;
      for (std::size_t i = 0; i < blocks[b].size(); ++i)
        u_cand[static_cast<std::size_t>(blocks[b][i])] = block_out[i];
      const Theta th_cand = from_unconstrained(u_cand, d.threshold_u, cfg.v_alpha);
      const detail::UpdateKind kind = (b == 0)   ? detail::UpdateKind::Marginal
                                      : (b == 1) ? detail::UpdateKind::Population
                                                 : detail::UpdateKind::Subject;
      const double cand_lp = engine.propose(th_cand, v, kind, b >= 2 ? b - 2 : 0);
      const double log_ratio =
          (cand_lp + bijection_log_jacobian(u_cand)) - (engine.state_logpost() + bijection_log_jacobian(u));
      const bool accepted = std::log(rng.uniform_open()) < log_ratio;
      ++theta_proposals;
      if (accepted) {
        engine.accept();
        u = u_cand;
        th = th_cand;
        ++theta_accepts;
      }
      if (adapting) {
        samplers[b].adapt(accepted, t);
        block_cur.clear();
        for (const int k : blocks[b]) block_cur.push_back(u[static_cast<std::size_t>(k)]);
        samplers[b].observe(block_cur.data());
      }
    }

    // Periodic clean rebuild kills incremental floating-point drift.
    if (cfg.rebuild_every > 0 && (t + 1) % cfg.rebuild_every == 0) engine.reset(th, v);

    if (t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) out.draws.push_back(u);
  }
  out.accept_rate = theta_proposals ? static_cast<double>(theta_accepts) / theta_proposals : 0.0;
  return out;
}

}  // namespace

Trace run_mcmc(const data::Dataset& d, const dist::GridSpec& g, const McmcConfig& cfg) {
  if (cfg.chains < 1) throw config_error("run_mcmc: chains must be >= 1");
  if (cfg.burn_in >= cfg.iters) throw config_error("run_mcmc: burn_in must be < iters");
  if (cfg.thin < 1) throw config_error("run_mcmc: thin must be >= 1");

  Trace trace;
  trace.names = parameter_names(d);
  trace.iters = cfg.iters;
  trace.burn_in = cfg.burn_in;
  trace.thin = cfg.thin;
  trace.chains.resize(static_cast<std::size_t>(cfg.chains));
  trace.seeds.resize(static_cast<std::size_t>(cfg.chains));
  trace.accept_rate.resize(static_cast<std::size_t>(cfg.chains));

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned n_workers = std::min<unsigned>(
      cfg.max_threads > 0 ? static_cast<unsigned>(cfg.max_threads) : hw, static_cast<unsigned>(cfg.chains));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= cfg.chains) return;
      try {
        ChainResult r = run_chain(d, g, cfg, c);
        trace.chains[static_cast<std::size_t>(c)] = std::move(r.draws);
        trace.seeds[static_cast<std::size_t>(c)] = r.seed;
        trace.accept_rate[static_cast<std::size_t>(c)] = r.accept_rate;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return trace;
}

std::vector<double> Trace::constrained(std::size_t chain, std::size_t draw) const {
  return unconstrained_to_constrained(chains[chain][draw]);
}

std::vector<Theta> draws_from_trace(const Trace& t, double threshold_u, double v_alpha) {
  std::vector<Theta> out;
  for (std::size_t c = 0; c < t.n_chains(); ++c)
    for (const auto& u : t.chains[c]) out.push_back(from_unconstrained(u, threshold_u, v_alpha));
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

std::pair<double, double> hpdi(std::vector<double> sample, double level) {
  if (sample.size() < 2) throw diagnostics_error("hpdi: sample too small");
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  const std::size_t w = std::min(n - 1, static_cast<std::size_t>(std::ceil(level * static_cast<double>(n))));
  double best_lo = sample.front(), best_hi = sample.back();
  for (std::size_t i = 0; i + w < n; ++i) {
    if (sample[i + w] - sample[i] < best_hi - best_lo) {
      best_lo = sample[i];
      best_hi = sample[i + w];
    }
  }
  return {best_lo, best_hi};
}

namespace {

struct SplitStats {
  double rhat;
  double ess;
};

SplitStats split_diagnostics(const std::vector<std::vector<double>>& sequences) {
  // Split each sequence in half.
  std::vector<std::vector<double>> seq;
  for (const auto& s : sequences) {
    const std::size_t half = s.size() / 2;
    seq.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half));
    seq.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(half), s.begin() + static_cast<std::ptrdiff_t>(2 * half));
  }
  const std::size_t m = seq.size();
  const std::size_t n = seq.front().size();
  if (n < 2) return {1.0, static_cast<double>(m * n)};

  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (const double x : seq[j]) acc += x;
    means[j] = acc / static_cast<double>(n);
    double sq = 0.0;
    for (const double x : seq[j]) sq += (x - means[j]) * (x - means[j]);
    vars[j] = sq / static_cast<double>(n - 1);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double b_over_n = 0.0;
  for (const double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= static_cast<double>(m - 1);
  const double var_plus = (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b_over_n;
  const double rhat = (w > 0.0) ? std::sqrt(var_plus / w) : 1.0;

  if (!(var_plus > 0.0)) return {rhat, static_cast<double>(m * n)};

  // Combined autocorrelations with Geyer's initial monotone sequence.
  const std::size_t max_lag = std::min<std::size_t>(n - 1, 1000);
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  std::vector<double> acov_t(m);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double mean_acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += (seq[j][i] - means[j]) * (seq[j][i + lag] - means[j]);
      mean_acov += acc / static_cast<double>(n);
    }
    mean_acov /= static_cast<double>(m);
    rho[lag] = 1.0 - (w - mean_acov) / var_plus;
  }
  double tau = 1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 <= max_lag; k += 2) {
    double pair = rho[k] + rho[k + 1];
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(m * n) / std::max(tau, 1e-12);
  return {rhat, ess};
}

}  // namespace

PosteriorSummary diagnostics(const Trace& t, double level) {
  if (t.n_chains() < 2) throw diagnostics_error(">= 2 chains required");
  const std::size_t n_draws = t.n_draws();
  for (const auto& c : t.chains)
    if (c.size() != n_draws) throw diagnostics_error("chains of unequal length");
  if (n_draws < 4) throw diagnostics_error("too few draws for diagnostics");

  PosteriorSummary s;
  s.names = t.names;
  s.level = level;
  const std::size_t n_par = t.names.size();
  for (std::size_t p = 0; p < n_par; ++p) {
    std::vector<std::vector<double>> sequences(t.n_chains());
    std::vector<double> pooled;
    pooled.reserve(t.n_chains() * n_draws);
    for (std::size_t c = 0; c < t.n_chains(); ++c) {
      sequences[c].reserve(n_draws);
      for (std::size_t k = 0; k < n_draws; ++k) {
        const double value = unconstrained_to_constrained(t.chains[c][k])[p];
        sequences[c].push_back(value);
        pooled.push_back(value);
      }
    }
    ParamSummary ps{};
    double acc = 0.0;
    for (const double x : pooled) acc += x;
    ps.mean = acc / static_cast<double>(pooled.size());
    double sq = 0.0;
    for (const double x : pooled) sq += (x - ps.mean) * (x - ps.mean);
    ps.sd = std::sqrt(sq / static_cast<double>(pooled.size() - 1));
    const auto interval = hpdi(pooled, level);
    ps.hpdi_lo = interval.first;
    ps.hpdi_hi = interval.second;
    const auto stats = split_diagnostics(sequences);
    ps.rhat = stats.rhat;
    ps.ess = stats.ess;
    s.params.push_back(ps);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_trace_csv(const Trace& t, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw data_error("cannot write '" + path + "'");
  std::fputs("chain,iteration", f);
  for (const auto& n : t.names) std::fprintf(f, ",%s", n.c_str());
  std::fputc('\n', f);
  for (std::size_t c = 0; c < t.n_chains(); ++c) {
    for (std::size_t k = 0; k < t.chains[c].size(); ++k) {
      const auto row = t.constrained(c, k);
      std::fprintf(f, "%zu,%ld", c, t.burn_in + static_cast<long>(k) * t.thin);
      for (const double x : row) std::fprintf(f, ",%.17g", x);
      std::fputc('\n', f);
    }
  }
  std::fclose(f);
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("'" + path + "': empty trace");
  Trace t;
  {
    std::stringstream ss(line);
    std::string field;
    int col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= 2) t.names.push_back(field);
      ++col;
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const std::size_t chain = static_cast<std::size_t>(std::stoul(field));
    std::getline(ss, field, ',');  // iteration
    std::vector<double> c;
    c.reserve(t.names.size());
    while (std::getline(ss, field, ',')) c.push_back(std::stod(field));
    if (c.size() != t.names.size()) throw data_error("'" + path + "': ragged trace row");
    if (chain >= t.chains.size()) t.chains.resize(chain + 1);
    t.chains[chain].push_back(constrained_to_unconstrained(c));
  }
  t.seeds.resize(t.chains.size(), 0);
  t.accept_rate.resize(t.chains.size(), 0.0);
  return t;
}

void write_summary_json(const PosteriorSummary& s, const std::string& path) {
  nlohmann::json j;
  for (std::size_t p = 0; p < s.names.size(); ++p) {
    j[s.names[p]] = {{"mean", s.params[p].mean},   {"sd", s.params[p].sd},     {"hpdi_lo", s.params[p].hpdi_lo},
                     {"hpdi_hi", s.params[p].hpdi_hi}, {"rhat", s.params[p].rhat}, {"ess", s.params[p].ess}};
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace longtail::inference
