#include "longtail/dist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "longtail/errors.hpp"

namespace longtail::dist {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Wichura (1988), algorithm AS 241, routine PPND16.
double norm_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw numeric_error("norm_quantile: q must lie in (0,1)");
  const double p = q - 0.5;
  if (std::fabs(p) <= 0.425) {
    const double r = 0.180625 - p * p;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return p * num / den;
  }
  double r = (p < 0.0) ? q : 1.0 - q;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    val = num / den;
  }
  return (p < 0.0) ? -val : val;
}

// ---------------------------------------------------------------------------
// Bivariate normal CDF
// ---------------------------------------------------------------------------

namespace {

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration
// on the Legendre recurrence. Deterministic to machine precision.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};
  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      double t = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double p0 = 0.0, p1 = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        p0 = 1.0;
        p1 = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * t * p1 - static_cast<double>(j) * p2) / (static_cast<double>(j) + 1.0);
        }
        const double dp = static_cast<double>(N) * (t * p0 - p1) / (t * t - 1.0);
        const double t_new = t - p0 / dp;
        if (std::fabs(t_new - t) < 1e-16) {
          t = t_new;
          break;
        }
        t = t_new;
      }
      p0 = 1.0;
      p1 = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - static_cast<double>(j) * p2) / (static_cast<double>(j) + 1.0);
      }
      const double dp = static_cast<double>(N) * (t * p0 - p1) / (t * t - 1.0);
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

const GaussLegendre<20> kGL20;

// Integrand of the Drezner-Wesolowsky form after t = sin(theta):
// (1/2pi) exp(-(h^2 + k^2 - 2 h k sin(theta)) / (2 cos^2(theta))).
inline double bvn_theta_integrand(double h, double k, double theta) {
  const double s = std::sin(theta);
  const double c2 = std::max(1.0 - s * s, 1e-300);
  const double e = (h * h + k * k - 2.0 * h * k * s) / (2.0 * c2);
  return (e > 700.0) ? 0.0 : std::exp(-e);
}

double bvn_integral(double h, double k, double a, double b) {
  // 20-point Gauss-Legendre over [a,b].
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < 20; ++i) acc += kGL20.w[i] * bvn_theta_integrand(h, k, mid + half * kGL20.x[i]);
  return acc * half / kTwoPi;
}

}  // namespace

double bvn_cdf(double h, double k, double rho) {
  if (!(std::fabs(rho) < 1.0)) throw numeric_error("bvn_cdf: |rho| must be < 1");
  if (rho == 0.0) return norm_cdf(h) * norm_cdf(k);
  const double asr = std::asin(rho);
  if (std::fabs(rho) <= 0.925) {
    return norm_cdf(h) * norm_cdf(k) + bvn_integral(h, k, 0.0, asr);
  }
  // Near-singular correlation: integrate the complement from asin(rho) to
  // +/- pi/2 and anchor at the exact rho = +/-1 copula. Composite panels
  // shrink geometrically toward the endpoint where the integrand develops a
  // boundary layer of width ~|h -+ k|.
  const double end = (rho > 0.0) ? 0.5 * std::numbers::pi : -0.5 * std::numbers::pi;
  const double anchor = (rho > 0.0) ? norm_cdf(std::min(h, k))                        // P(A<=h, A<=k)
                                    : std::max(0.0, norm_cdf(h) - norm_cdf(-k));      // P(A<=h, -A<=k)
  double tail = 0.0;
  double a = asr;
  const int panels = 48;
  for (int i = 0; i < panels; ++i) {
    const double frac = (i + 1 < panels) ? std::pow(2.0, -(i + 1)) : 0.0;
    const double b = end - (end - asr) * frac;
    tail += bvn_integral(h, k, a, b);
    a = b;
  }
  return anchor - tail;
}

// ---------------------------------------------------------------------------
// GPD / GEV
// ---------------------------------------------------------------------------

double GpdParams::upper_endpoint() const {
  return (xi < 0.0) ? u - sigma_u / xi : std::numeric_limits<double>::infinity();
}

double gpd_cdf(const GpdParams& p, double x) {
  if (x < p.u) throw numeric_error("gpd_cdf: x below threshold");
  const double w = (x - p.u) / p.sigma_u;
  if (std::fabs(p.xi) < kXiTiny) return -std::expm1(-w);
  const double t = 1.0 + p.xi * w;
  if (t <= 0.0) return 1.0;  // at or beyond the finite endpoint (xi < 0)
  return -std::expm1(-std::log(t) / p.xi);
}

double gpd_quantile(const GpdParams& p, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw numeric_error("gpd_quantile: q must lie in [0,1)");
  if (std::fabs(p.xi) < kXiTiny) return p.u - p.sigma_u * std::log1p(-q);
  return p.u + p.sigma_u * std::expm1(-p.xi * std::log1p(-q)) / p.xi;
}

double gev_cdf(const GevParams& p, double x) {
  const double w = (x - p.mu) / p.sigma;
  if (std::fabs(p.xi) < kXiTiny) return std::exp(-std::exp(-w));
  const double t = 1.0 + p.xi * w;
  if (t <= 0.0) return (p.xi > 0.0) ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log(t) / p.xi));
}

// ---------------------------------------------------------------------------
// Gaussian mixture marginal
// ---------------------------------------------------------------------------

double mixture_cdf(const MixtureMarginal& m, double z) {
  double acc = 0.0;
  for (const auto& c : m.components) acc += norm_cdf((z - c.mean) / c.sd);
  return acc / static_cast<double>(m.size());
}

double mixture_pdf(const MixtureMarginal& m, double z) {
  double acc = 0.0;
  for (const auto& c : m.components) acc += norm_pdf((z - c.mean) / c.sd) / c.sd;
  return acc / static_cast<double>(m.size());
}

GridSpec default_grid(const MixtureMarginal& m, std::size_t count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sd = 0.0;
  for (const auto& c : m.components) {
    lo = std::min(lo, c.mean);
    hi = std::max(hi, c.mean);
    sd = std::max(sd, c.sd);
  }
  return GridSpec{lo - 6.0 * sd, hi + 6.0 * sd, count};
}

GridInverseResult mixture_inverse_detailed(const MixtureMarginal& m, double p, const GridSpec& g) {
  if (m.size() == 0) throw numeric_error("mixture_inverse: empty mixture");
  if (!(p > 0.0 && p < 1.0)) throw numeric_error("mixture_inverse: p must lie in (0,1)");
  if (p < mixture_cdf(m, g.node(0)))
    throw numeric_error("mixture_inverse: p below the CDF range attained on the grid (low side)");
  if (p > mixture_cdf(m, g.node(g.count - 1)))
    throw numeric_error("mixture_inverse: p above the CDF range attained on the grid (high side)");
  // First node with CDF >= p; the argmin of |CDF - p| is this node or the one
  // before it.
  std::size_t lo = 0, hi = g.count - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (mixture_cdf(m, g.node(mid)) < p)
      lo = mid + 1;
    else
      hi = mid;
  }
  GridInverseResult best{g.node(lo), lo, std::fabs(mixture_cdf(m, g.node(lo)) - p)};
  if (lo > 0) {
    const double r = std::fabs(mixture_cdf(m, g.node(lo - 1)) - p);
    if (r < best.residual) best = {g.node(lo - 1), lo - 1, r};
  }
  return best;
}

double mixture_inverse(const MixtureMarginal& m, double p, const GridSpec& g) {
  return mixture_inverse_detailed(m, p, g).z;
}

double mixture_inverse_exact(const MixtureMarginal& m, double p, double tol) {
  if (m.size() == 0) throw numeric_error("mixture_inverse_exact: empty mixture");
  if (!(p > 0.0 && p < 1.0)) throw numeric_error("mixture_inverse_exact: p must lie in (0,1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : m.components) {
    lo = std::min(lo, c.mean - 10.0 * c.sd);
    hi = std::max(hi, c.mean + 10.0 * c.sd);
  }
  while (mixture_cdf(m, lo) > p) lo -= (hi - lo);
  while (mixture_cdf(m, hi) < p) hi += (hi - lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_cdf(m, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace longtail::dist
