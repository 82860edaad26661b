#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "longtail/data.hpp"
#include "longtail/dist.hpp"
#include "longtail/latent.hpp"
#include "longtail/marginal.hpp"

namespace longtail::inference {

/// The full parameter bundle: observed-space margins, one (alpha, tau) pair
/// per retained subject, population effects, kernel.
struct Theta {
  marginal::MarginalParams marginal;
  std::vector<latent::SubjectEffects> subjects;
  latent::PopulationEffects population;
  latent::KernelParams kernel;
};

// ---------------------------------------------------------------------------
// Sampling parameterization
// ---------------------------------------------------------------------------
// log for sigma_u, beta1, gamma, nu, kappa0; logit(xi+1); logit((kappa1-.5)/1.5);
// identity for beta0, alpha_i, tau_i.

std::vector<double> to_unconstrained(const Theta& th);
Theta from_unconstrained(const std::vector<double>& u, double threshold_u, double v_alpha);
/// log |d constrained / d unconstrained|.
double bijection_log_jacobian(const std::vector<double>& u);
/// Coordinate-wise map to the constrained scale (what trace files carry).
std::vector<double> unconstrained_to_constrained(const std::vector<double>& u);
std::vector<double> constrained_to_unconstrained(const std::vector<double>& c);
std::vector<std::string> parameter_names(const data::Dataset& d);

double log_prior(const Theta& th);

/// log prior + latent log-likelihood + censored/exceedance Jacobian terms,
/// with latent values obtained through the grid-search transform. Returns
/// -infinity on any domain violation (counted in diag).
double log_posterior(const Theta& th, const marginal::AuxBelow& aux, const data::Dataset& d, const dist::GridSpec& g,
                     marginal::EvalDiagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

struct McmcConfig {
  int chains = 4;
  long iters = 5000;
  long burn_in = 2500;
  int thin = 1;
  std::uint64_t seed = 1;
  double target_accept_block = 0.234;
  double target_accept_scalar = 0.44;
  /// Auxiliary-refresh sweeps per iteration (pseudo-marginal redraw of v).
  int aux_refreshes = 1;
  /// State arrays are rebuilt from scratch this often to stop incremental
  /// floating-point drift.
  int rebuild_every = 32;
  int max_threads = 0;  // 0: hardware concurrency
  double v_alpha = 6.0;
};

struct Trace {
  std::vector<std::string> names;  // constrained-scale names
  /// Post burn-in, thinned draws on the unconstrained scale: [chain][draw][param].
  std::vector<std::vector<std::vector<double>>> chains;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accept_rate;  // per chain, over theta blocks
  long iters = 0, burn_in = 0;
  int thin = 1;

  std::size_t n_chains() const { return chains.size(); }
  std::size_t n_draws() const { return chains.empty() ? 0 : chains.front().size(); }
  std::vector<double> constrained(std::size_t chain, std::size_t draw) const;
};

Trace run_mcmc(const data::Dataset& d, const dist::GridSpec& g, const McmcConfig& cfg);

/// Reconstructs constrained parameter bundles from a trace (all chains pooled,
/// draw-major).
std::vector<Theta> draws_from_trace(const Trace& t, double threshold_u, double v_alpha);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct ParamSummary {
  double mean, sd, hpdi_lo, hpdi_hi, rhat, ess;
};
struct PosteriorSummary {
  std::vector<std::string> names;
  std::vector<ParamSummary> params;
  double level;
};

/// Split R-hat, effective sample size, moments and shortest `level`-mass
/// interval per parameter, on the constrained scale. Needs >= 2 chains of
/// equal length.
PosteriorSummary diagnostics(const Trace& t, double level);

/// Shortest interval containing `level` mass of the sample.
std::pair<double, double> hpdi(std::vector<double> sample, double level);

// ---------------------------------------------------------------------------
// Trace/summary files
// ---------------------------------------------------------------------------

void write_trace_csv(const Trace& t, const std::string& path);
Trace read_trace_csv(const std::string& path);
void write_summary_json(const PosteriorSummary& s, const std::string& path);

// ---------------------------------------------------------------------------
// Generic adaptive blocked random-walk MH (sampler validation surface)
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> sample_generic(const std::function<double(const std::vector<double>&)>& logtarget,
                                                std::vector<double> init,
                                                const std::vector<std::vector<int>>& blocks, long iters, long burn_in,
                                                int thin, std::uint64_t seed, double target_block = 0.234,
                                                double target_scalar = 0.44);

}  // namespace longtail::inference
