#include "longtail/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "longtail/errors.hpp"

namespace longtail::predict {

namespace {

std::size_t pick_index(rng::Engine& rng, std::size_t n) {
  const double u = rng.uniform();
  std::size_t k = static_cast<std::size_t>(u * static_cast<double>(n));
  return std::min(k, n - 1);
}

int civil_year(double days) {
  return std::stoi(data::format_date(static_cast<std::int64_t>(std::floor(days))).substr(0, 4));
}

dist::MixtureMarginal dataset_mixture(const data::Dataset& d, const inference::Theta& th) {
  dist::MixtureMarginal mix;
  mix.components.reserve(d.n_obs());
  for (std::size_t i = 0; i < d.n_subjects(); ++i)
    for (const auto& o : d.subjects[i].observations)
      mix.components.push_back(
          {latent::mean_fn(th.subjects[i], th.population, d.subjects[i].birth_date, static_cast<double>(o.time)),
           th.population.nu});
  return mix;
}

/// Latent reconstruction of one subject's past values under a posterior draw;
/// censored entries use fresh uniform auxiliaries.
std::vector<double> reconstruct_latent(const data::Dataset& d, const inference::Theta& th,
                                       const dist::MixtureMarginal& mix, const dist::GridSpec& g, std::size_t i,
                                       rng::Engine& rng) {
  std::vector<double> z;
  z.reserve(d.subjects[i].n_obs());
  for (const auto& o : d.subjects[i].observations) {
    const double t_years = d.t_years(o.time);
    if (o.value > d.threshold_u)
      z.push_back(marginal::to_latent_above(th.marginal, mix, g, o.value, t_years));
    else
      z.push_back(marginal::to_latent_below(th.marginal, mix, g, rng.uniform_open(), t_years));
  }
  return z;
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

SynthResult synthesize_dataset(const SynthParams& sp, std::uint64_t seed) {
  rng::Engine rng(seed);
  const double years = static_cast<double>(sp.window.t1_days - sp.window.t0_days) / data::kDaysPerYear;
  const double u = sp.marginal.gpd.u;

  struct Draft {
    std::string id;
    std::int64_t birth;
    std::vector<double> times;
    std::vector<double> z;
    latent::SubjectEffects se;
  };
  std::vector<Draft> drafts;
  for (std::size_t i = 0; i < sp.n_subjects; ++i) {
    Draft dr;
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%04zu", i);
    dr.id = buf;
    const double age0 = rng.uniform(sp.age_lo, sp.age_hi);
    dr.birth = sp.window.t0_days - static_cast<std::int64_t>(std::llround(age0 * data::kDaysPerYear));
    dr.se.alpha = rng.normal(0.0, sp.population.v_alpha);
    double tau = rng.normal(25.0, 2.5);
    while (tau <= 0.0) tau = rng.normal(25.0, 2.5);
    dr.se.tau = tau;
    const long n = rng.poisson(sp.obs_rate_per_year * years);
    if (n == 0) continue;
    std::set<std::int64_t> days;
    while (days.size() < static_cast<std::size_t>(n)) {
      days.insert(sp.window.t0_days +
                  static_cast<std::int64_t>(rng.uniform() * static_cast<double>(sp.window.t1_days - sp.window.t0_days)));
    }
    for (const auto day : days) dr.times.push_back(static_cast<double>(day));
    dr.z = latent::gp_simulate(dr.se, sp.population, sp.kernel, dr.birth, dr.times, std::nullopt, rng);
    drafts.push_back(std::move(dr));
  }
  if (drafts.empty()) throw numeric_error("synthesize_dataset: no observations generated");

  // Mixture over the realized design.
  dist::MixtureMarginal mix;
  double t_first = std::numeric_limits<double>::infinity();
  for (const auto& dr : drafts) {
    for (std::size_t j = 0; j < dr.times.size(); ++j) {
      mix.components.push_back({latent::mean_fn(dr.se, sp.population, dr.birth, dr.times[j]), sp.population.nu});
      t_first = std::min(t_first, dr.times[j]);
    }
  }

  SynthResult out;
  out.dataset.sign_flip = false;
  out.dataset.threshold_u = u;
  for (auto& dr : drafts) {
    data::Subject s;
    s.id = dr.id;
    s.birth_date = dr.birth;
    for (std::size_t j = 0; j < dr.times.size(); ++j) {
      const double t_years = (dr.times[j] - t_first) / data::kDaysPerYear;
      const double lam = marginal::lambda_u(sp.marginal.rate, t_years);
      const double p = dist::mixture_cdf(mix, dr.z[j]);
      double value = u;  // censored sentinel
      if (p > 1.0 - lam) value = marginal::fx_quantile(sp.marginal, p, t_years);
      s.observations.push_back(data::Observation{static_cast<std::int64_t>(dr.times[j]), value, value});
    }
    out.dataset.subjects.push_back(std::move(s));
    out.effects.push_back(dr.se);
    out.latent_values.push_back(std::move(dr.z));
  }
  out.dataset.t0 = static_cast<std::int64_t>(t_first);
  out.dataset.t_max = std::numeric_limits<std::int64_t>::min();
  for (const auto& s : out.dataset.subjects)
    for (const auto& o : s.observations) out.dataset.t_max = std::max(out.dataset.t_max, o.time);
  return out;
}

// ---------------------------------------------------------------------------
// Future simulation
// ---------------------------------------------------------------------------

std::map<std::string, double> subject_rates(const data::Dataset& d) {
  std::map<std::string, double> rates;
  for (const auto& s : d.subjects) {
    const double span =
        static_cast<double>(s.observations.back().time - s.observations.front().time) / data::kDaysPerYear;
    double rate = (span > 0.0) ? static_cast<double>(s.n_obs()) / span : 1.0;
    rates[s.id] = std::max(rate, 1.0);
  }
  return rates;
}

PredictiveSample simulate_future(const std::vector<inference::Theta>& draws, const data::Dataset& d,
                                 const FutureWindow& fw, const FuturePopulationConfig& cfg, const dist::GridSpec& g,
                                 std::size_t n_replicates, std::uint64_t seed) {
  if (draws.empty()) throw numeric_error("simulate_future: posterior draws required");
  if (!(fw.horizon_years > 0.0)) throw config_error("simulate_future: horizon must be > 0");

  const double horizon_days = fw.horizon_years * data::kDaysPerYear;
  const double window_years = std::max(static_cast<double>(d.t_max - d.t0) / data::kDaysPerYear, 1e-9);
  const double r_data = cfg.r_data >= 0.0 ? cfg.r_data : static_cast<double>(d.n_subjects()) / window_years;

  auto rates = subject_rates(d);
  for (const auto& [id, w] : cfg.per_subject_rates) rates[id] = w;

  std::vector<std::int64_t> cov_pool = cfg.covariate_pool;
  if (cov_pool.empty())
    for (const auto& s : d.subjects) cov_pool.push_back(s.birth_date);

  // Current subjects with recent activity.
  const std::int64_t cutoff =
      d.t_max - static_cast<std::int64_t>(cfg.recent_fraction * static_cast<double>(d.t_max - d.t0));
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < d.n_subjects(); ++i)
    if (d.subjects[i].observations.back().time >= cutoff) current.push_back(i);

  PredictiveSample out;
  out.threshold_u = d.threshold_u;
  out.t_max = fw.t_max;
  out.replicates.reserve(n_replicates);

  for (std::size_t rep = 0; rep < n_replicates; ++rep) {
    rng::Engine rng(rng::substream(seed, "replicate", rep));
    const std::size_t draw_idx = rep % draws.size();
    const inference::Theta& th = draws[draw_idx];
    const dist::MixtureMarginal mix = dataset_mixture(d, th);

    Replicate replicate;
    replicate.draw_index = draw_idx;

    auto push_candidate = [&](Tag tag, const std::string& id, const std::vector<double>& times,
                              const std::vector<double>& z) {
      Candidate c;
      c.tag = tag;
      c.id = id;
      for (std::size_t j = 0; j < times.size(); ++j) {
        const double t_years = d.t_years(static_cast<std::int64_t>(times[j]));
        const double lam = marginal::lambda_u(th.marginal.rate, t_years);
        const double p = dist::mixture_cdf(mix, z[j]);
        if (p > 1.0 - lam) {
          c.times_days.push_back(times[j]);
          c.values.push_back(marginal::fx_quantile(th.marginal, p, t_years));
        }
      }
      if (!c.values.empty()) replicate.candidates.push_back(std::move(c));
    };

    auto future_times = [&](double omega) {
      std::vector<double> times;
      const long n = rng.poisson(fw.horizon_years * omega);
      times.reserve(static_cast<std::size_t>(n));
      for (long k = 0; k < n; ++k)
        times.push_back(static_cast<double>(fw.t_max) + rng.uniform() * horizon_days);
      std::sort(times.begin(), times.end());
      return times;
    };

    // Current subjects: conditional continuation of their own process.
    for (const std::size_t i : current) {
      const auto times = future_times(rates.at(d.subjects[i].id));
      if (times.empty()) continue;
      latent::Conditioning cond;
      for (const auto& o : d.subjects[i].observations) cond.times_days.push_back(static_cast<double>(o.time));
      cond.values = reconstruct_latent(d, th, mix, g, i, rng);
      const auto z = latent::gp_simulate(th.subjects[i], th.population, th.kernel, d.subjects[i].birth_date, times,
                                         cond, rng);
      push_candidate(Tag::current, d.subjects[i].id, times, z);
    }

    // First-exceedance subjects: real covariates, effects borrowed from a
    // random retained subject's posterior, no conditioning.
    for (const auto& pool : cfg.f_pool) {
      const auto times = future_times(pool.omega);
      if (times.empty()) continue;
      const auto& se = th.subjects[pick_index(rng, th.subjects.size())];
      const auto z = latent::gp_simulate(se, th.population, th.kernel, pool.birth_date, times, std::nullopt, rng);
      push_candidate(Tag::first_exceed, pool.id, times, z);
    }

    // Brand-new subjects: Poisson arrivals, log-normal rates centred on an
    // existing subject's rate, covariates resampled from the database.
    const long n_new = rng.poisson(fw.horizon_years * r_data);
    for (long k = 0; k < n_new; ++k) {
      const double omega_anchor = rates.at(d.subjects[pick_index(rng, d.n_subjects())].id);
      const double omega =
          (cfg.psi > 0.0)
              ? rng.lognormal(std::log(omega_anchor) - 0.5 * cfg.psi * cfg.psi, cfg.psi)
              : omega_anchor;
      const auto times = future_times(omega);
      if (times.empty()) continue;
      const std::int64_t birth = cov_pool[pick_index(rng, cov_pool.size())];
      const auto& se = th.subjects[pick_index(rng, th.subjects.size())];
      const auto z = latent::gp_simulate(se, th.population, th.kernel, birth, times, std::nullopt, rng);
      push_candidate(Tag::brand_new, "new:" + std::to_string(k), times, z);
    }

    out.replicates.push_back(std::move(replicate));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Record events
// ---------------------------------------------------------------------------

EventSummary record_event_probs(const PredictiveSample& ps, double record_r) {
  EventSummary s;
  const double n_rep = static_cast<double>(ps.replicates.size());
  std::map<std::string, std::vector<double>> pb;
  std::map<std::string, std::map<int, std::size_t>> year_counts;
  std::map<std::string, std::size_t> first_counts;
  std::size_t breaches = 0;

  for (const auto& rep : ps.replicates) {
    double best_time = std::numeric_limits<double>::infinity();
    std::string best_key;
    for (const auto& c : rep.candidates) {
      const std::string key = (c.tag == Tag::current) ? "current:" + c.id : (c.tag == Tag::first_exceed ? "first" : "new");
      double window_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c.values.size(); ++j) {
        window_max = std::max(window_max, c.values[j]);
        if (c.values[j] > record_r && c.times_days[j] < best_time) {
          best_time = c.times_days[j];
          best_key = key;
        }
      }
      if (c.tag == Tag::current) pb[c.id].push_back(window_max);
    }
    if (!best_key.empty()) {
      ++breaches;
      ++first_counts[best_key];
      ++year_counts[best_key][civil_year(best_time)];
    }
  }

  for (const auto& [key, cnt] : first_counts) s.p_first_record[key] = static_cast<double>(cnt) / n_rep;
  s.p_no_breach = 1.0 - static_cast<double>(breaches) / n_rep;
  for (const auto& [key, hist] : year_counts)
    for (const auto& [year, cnt] : hist) s.first_record_year_hist[key][year] = static_cast<double>(cnt) / n_rep;
  for (auto& [id, values] : pb) {
    s.pb_presence[id] = static_cast<double>(values.size()) / n_rep;
    std::sort(values.begin(), values.end());
    const auto q = [&](double p) {
      const std::size_t k = static_cast<std::size_t>(p * static_cast<double>(values.size() - 1));
      return values[k];
    };
    s.pb_quantiles[id] = {q(0.025), q(0.25), q(0.5), q(0.75), q(0.975)};
  }
  return s;
}

RecordAnalytics record_analytics(const marginal::MarginalParams& mp, double r, double s_t, double t_years) {
  const auto& p = mp.gpd;
  if (r < p.u) throw numeric_error("record_analytics: r must be at or above the threshold");
  const double sigma_r = p.sigma_u + p.xi * (r - p.u);
  if (!(sigma_r > 0.0)) throw numeric_error("record_analytics: record beyond endpoint");
  RecordAnalytics out;
  out.sigma_r = sigma_r;
  out.expected_next_record = r + sigma_r / (1.0 - p.xi);
  out.ultimate_endpoint = p.upper_endpoint();
  const double w = (r - p.u) / p.sigma_u;
  const double surv = (std::fabs(p.xi) < dist::kXiTiny) ? std::exp(-w)
                                                        : std::exp(-std::log1p(p.xi * w) / p.xi);
  out.lambda_r = s_t * marginal::lambda_u(mp.rate, t_years) * surv;
  return out;
}

// ---------------------------------------------------------------------------
// Analytic record probability
// ---------------------------------------------------------------------------

namespace {

struct RecordIntegrand {
  const std::vector<ScheduleEntry>* subjects;
  std::size_t target;

  double operator()(double q) const {
    if (!(q > 0.0 && q < 1.0)) return 0.0;
    const auto& tgt = (*subjects)[target];
    const double std_t = dist::norm_quantile(q);
    const double z = tgt.alpha + tgt.nu * std_t;
    double log_prod = 0.0;
    double hazard = 0.0;
    for (std::size_t k = 0; k < subjects->size(); ++k) {
      if (k == target) continue;
      const auto& s = (*subjects)[k];
      const double std_k = (z - s.alpha) / s.nu;
      const double cdf = dist::norm_cdf(std_k);
      if (cdf <= 0.0) return 0.0;
      log_prod += s.count * std::log(cdf);
      hazard += s.count * dist::norm_pdf(std_k) / (s.nu * cdf);
    }
    const double surv_target = -std::expm1(tgt.count * std::log(q));
    const double phi_t = dist::norm_pdf(std_t);
    if (phi_t <= 0.0) return 0.0;
    return surv_target * std::exp(log_prod) * hazard * tgt.nu / phi_t;
  }
};

double adaptive_simpson(const RecordIntegrand& f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0)
    throw numeric_error("analytic_record_prob: quadrature did not converge; residual ~" + std::to_string(delta));
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double analytic_record_prob(const std::vector<ScheduleEntry>& subjects, double r_z, std::size_t target, double tol) {
  if (target >= subjects.size()) throw numeric_error("analytic_record_prob: bad target index");
  const auto& tgt = subjects[target];

  const double q_r = dist::norm_cdf((r_z - tgt.alpha) / tgt.nu);
  double term1;
  {
    const double log_q = std::log(std::max(q_r, 1e-300));
    const double surv = (q_r > 0.0) ? -std::expm1(tgt.count * log_q) : 1.0;
    double log_prod = 0.0;
    for (std::size_t k = 0; k < subjects.size(); ++k) {
      if (k == target) continue;
      const double cdf = dist::norm_cdf((r_z - subjects[k].alpha) / subjects[k].nu);
      if (cdf <= 0.0) {
        log_prod = -std::numeric_limits<double>::infinity();
        break;
      }
      log_prod += subjects[k].count * std::log(cdf);
    }
    term1 = surv * std::exp(log_prod);
  }
  if (subjects.size() == 1) return term1;

  RecordIntegrand f{&subjects, target};
  const double a = std::max(q_r, 1e-300);
  const double b = 1.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = 0.0;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double integral = adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60);
  return term1 + integral;
}

// ---------------------------------------------------------------------------
// Posterior predictive at observed dates
// ---------------------------------------------------------------------------

namespace {

double empirical_subthreshold_quantile(const std::vector<double>& sorted_below, double p, double u) {
  if (sorted_below.empty()) return u;
  const double idx = p * static_cast<double>(sorted_below.size() - 1);
  const std::size_t k = std::min(static_cast<std::size_t>(std::max(idx, 0.0)), sorted_below.size() - 1);
  return sorted_below[k];
}

}  // namespace

PredictiveAtDates posterior_predictive_at_dates(const std::vector<inference::Theta>& draws, const data::Dataset& d,
                                                const dist::GridSpec& g, std::size_t n_rep, std::uint64_t seed) {
  if (draws.empty()) throw numeric_error("posterior_predictive_at_dates: posterior draws required");
  std::vector<double> below;
  for (const auto& s : d.subjects)
    for (const auto& o : s.observations)
      if (!(o.value > d.threshold_u)) below.push_back(o.value);
  std::sort(below.begin(), below.end());

  PredictiveAtDates out;
  out.samples.resize(d.n_obs());

  for (std::size_t rep = 0; rep < n_rep; ++rep) {
    rng::Engine rng(rng::substream(seed, "predictive", rep));
    const inference::Theta& th = draws[rep % draws.size()];
    const dist::MixtureMarginal mix = dataset_mixture(d, th);
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d.n_subjects(); ++i) {
      const auto& subject = d.subjects[i];
      const std::vector<double> z_all = reconstruct_latent(d, th, mix, g, i, rng);
      for (std::size_t j = 0; j < subject.n_obs(); ++j, ++flat) {
        latent::Conditioning cond;
        for (std::size_t k = 0; k < subject.n_obs(); ++k) {
          if (k == j) continue;
          cond.times_days.push_back(static_cast<double>(subject.observations[k].time));
          cond.values.push_back(z_all[k]);
        }
        const auto mom = latent::gp_conditional_moments(th.subjects[i], th.population, th.kernel, subject.birth_date,
                                                        static_cast<double>(subject.observations[j].time), cond);
        const double z_new = rng.normal(mom.mean, std::sqrt(mom.var));
        const double t_years = d.t_years(subject.observations[j].time);
        const double lam = marginal::lambda_u(th.marginal.rate, t_years);
        const double p = dist::mixture_cdf(mix, z_new);
        double value;
        if (p > 1.0 - lam)
          value = marginal::fx_quantile(th.marginal, p, t_years);
        else
          value = empirical_subthreshold_quantile(below, p / (1.0 - lam), d.threshold_u);
        out.samples[flat].push_back(d.sign_flip ? -value : value);
      }
    }
  }
  return out;
}

}  // namespace longtail::predict
