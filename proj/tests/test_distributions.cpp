#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "longtail/dist.hpp"
#include "longtail/errors.hpp"
#include "longtail/rng.hpp"

using namespace longtail;
using dist::GpdParams;

namespace {

// Independent high-precision Phi via the erf Maclaurin series in long double;
// usable for |x| <= 4 or so.
double phi_series(double x) {
  const long double z = static_cast<long double>(x) / std::numbers::sqrt2_v<long double>;
  long double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / static_cast<long double>(n);
    sum += term / static_cast<long double>(2 * n + 1);
  }
  const long double erf = sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
  return static_cast<double>(0.5L * (1.0L + erf));
}

}  // namespace

TEST_CASE("normal cdf and quantile agree to 1e-12") {
  CHECK(dist::norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dist::norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(dist::norm_quantile(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-9));
  for (double x : {-3.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.5, 3.9}) CHECK(dist::norm_cdf(x) == doctest::Approx(phi_series(x)).epsilon(1e-14));
  rng::Engine rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double q = rng.uniform_open();
    CHECK(std::fabs(dist::norm_cdf(dist::norm_quantile(q)) - q) < 1e-12);
  }
  // extreme tails round-trip too
  for (double q : {1e-12, 1e-9, 1e-300, 1.0 - 1e-12}) {
    CHECK(std::fabs(dist::norm_cdf(dist::norm_quantile(q)) - q) <= 1e-12 * std::max(1.0, q));
  }
  CHECK_THROWS_AS(dist::norm_quantile(0.0), numeric_error);
  CHECK_THROWS_AS(dist::norm_quantile(1.0), numeric_error);
}

TEST_CASE("gpd cdf examples and endpoint") {
  GpdParams p{0.0, 1.0, -0.5};
  CHECK(dist::gpd_cdf(p, 0.0) == 0.0);
  CHECK(dist::gpd_cdf(p, 2.0) == 1.0);
  CHECK(dist::gpd_cdf(p, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p.upper_endpoint() == doctest::Approx(2.0));
  CHECK_THROWS_AS(dist::gpd_cdf(p, -0.1), numeric_error);
  // xi ~ 0 exponential limit
  GpdParams e{0.0, 1.0, 0.0};
  CHECK(dist::gpd_cdf(e, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("gpd quantile inverts the cdf") {
  GpdParams p{0.0, 1.0, -0.5};
  CHECK(dist::gpd_quantile(p, 0.0) == 0.0);
  CHECK(dist::gpd_quantile(p, 0.75) == doctest::Approx(1.0).epsilon(1e-12));
  GpdParams e{0.0, 1.0, 0.0};
  CHECK(dist::gpd_quantile(e, 1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(dist::gpd_quantile(p, 1.0), numeric_error);
  CHECK_THROWS_AS(dist::gpd_quantile(p, -0.01), numeric_error);

  rng::Engine rng(3);
  for (int i = 0; i < 500; ++i) {
    const double xi = rng.uniform(-0.9, 0.9);
    GpdParams q{rng.uniform(-5.0, 5.0), rng.uniform(0.1, 4.0), std::fabs(xi) < 2e-8 ? 0.0 : xi};
    const double prob = rng.uniform(0.0, 0.999);
    const double x = dist::gpd_quantile(q, prob);
    CHECK(std::fabs(dist::gpd_cdf(q, x) - prob) < 1e-10);
  }
}

TEST_CASE("gpd threshold stability") {
  rng::Engine rng(11);
  for (int i = 0; i < 200; ++i) {
    const double xi0 = rng.uniform(-0.9, 0.9);
    GpdParams p{rng.uniform(-3.0, 3.0), rng.uniform(0.2, 3.0), std::fabs(xi0) < 2e-8 ? 0.05 : xi0};
    const double span = (p.xi < 0.0) ? (p.upper_endpoint() - p.u) : 5.0 * p.sigma_u;
    const double r = p.u + rng.uniform(0.05, 0.6) * span;
    const double x = r + rng.uniform(0.05, 0.35) * span;
    GpdParams shifted{r, p.sigma_u + p.xi * (r - p.u), p.xi};
    const double lhs = (1.0 - dist::gpd_cdf(p, x)) / (1.0 - dist::gpd_cdf(p, r));
    const double rhs = 1.0 - dist::gpd_cdf(shifted, x);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(std::fabs(rhs), 1e-30));
  }
}

TEST_CASE("gev cdf") {
  dist::GevParams g{0.0, 1.0, 0.0};
  CHECK(dist::gev_cdf(g, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(dist::gev_cdf(g, 1e8) == doctest::Approx(1.0));
  dist::GevParams neg{0.0, 1.0, -0.5};
  CHECK(dist::gev_cdf(neg, 2.0) == 1.0);
  dist::GevParams pos{0.0, 1.0, 0.5};
  CHECK(dist::gev_cdf(pos, -2.0) == 0.0);
}

TEST_CASE("bivariate normal cdf") {
  CHECK(dist::bvn_cdf(0.0, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(dist::bvn_cdf(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(dist::bvn_cdf(37.0, 1.0, 0.7) == doctest::Approx(dist::norm_cdf(1.0)).epsilon(1e-9));
  CHECK_THROWS_AS(dist::bvn_cdf(0.0, 0.0, 1.0), numeric_error);

  // arcsin identity over rho, including the near-singular branch
  for (double rho : {-0.99, -0.95, -0.6, -0.2, 0.1, 0.5, 0.9, 0.93, 0.975, 0.999}) {
    const double expect = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    CHECK(dist::bvn_cdf(0.0, 0.0, rho) == doctest::Approx(expect).epsilon(1e-8));
  }
  // independence product on random arguments
  rng::Engine rng(5);
  for (int i = 0; i < 300; ++i) {
    const double h = rng.uniform(-4.0, 4.0), k = rng.uniform(-4.0, 4.0);
    CHECK(std::fabs(dist::bvn_cdf(h, k, 0.0) - dist::norm_cdf(h) * dist::norm_cdf(k)) < 1e-9);
  }
  // symmetry and monotone-in-rho sanity near the singular corner
  CHECK(dist::bvn_cdf(1.3, -0.4, 0.95) == doctest::Approx(dist::bvn_cdf(-0.4, 1.3, 0.95)).epsilon(1e-10));
  CHECK(dist::bvn_cdf(1.0, 1.0, 0.999) <= dist::norm_cdf(1.0) + 1e-12);
  CHECK(dist::bvn_cdf(1.0, 1.0, 0.999) == doctest::Approx(dist::norm_cdf(1.0)).epsilon(1e-3));
}

TEST_CASE("mixture cdf/pdf") {
  dist::MixtureMarginal one{{{0.0, 1.0}}};
  CHECK(dist::mixture_cdf(one, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  dist::MixtureMarginal sym{{{-1.0, 1.0}, {1.0, 1.0}}};
  CHECK(dist::mixture_cdf(sym, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  dist::MixtureMarginal two{{{0.0, 1.0}, {2.0, 1.0}}};
  CHECK(dist::mixture_cdf(two, 1.0) == doctest::Approx(0.5).epsilon(1e-14));

  // pdf equals the central finite difference of the cdf
  rng::Engine rng(9);
  dist::MixtureMarginal mix;
  for (int c = 0; c < 5; ++c) mix.components.push_back({rng.uniform(-3.0, 3.0), rng.uniform(0.3, 2.0)});
  for (int i = 0; i < 50; ++i) {
    const double z = rng.uniform(-5.0, 5.0);
    const double h = 1e-5;
    const double fd = (dist::mixture_cdf(mix, z + h) - dist::mixture_cdf(mix, z - h)) / (2.0 * h);
    CHECK(std::fabs(dist::mixture_pdf(mix, z) - fd) < 1e-6);
  }
  // monotone cdf
  double prev = -1.0;
  for (double z = -6.0; z <= 6.0; z += 0.05) {
    const double v = dist::mixture_cdf(mix, z);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("mixture grid inverse") {
  dist::MixtureMarginal one{{{0.0, 1.0}}};
  const dist::GridSpec g{-8.0, 8.0, 1601};
  CHECK(dist::mixture_inverse(one, 0.5, g) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::fabs(dist::mixture_inverse(one, 0.841344746068543, g) - 1.0) <= g.spacing() + 1e-12);

  CHECK_THROWS_WITH_AS(static_cast<void>(dist::mixture_inverse(one, 1e-300, g)),
                       doctest::Contains("low side"), numeric_error);
  CHECK_THROWS_WITH_AS(static_cast<void>(dist::mixture_inverse(one, 1.0 - 1e-16, g)),
                       doctest::Contains("high side"), numeric_error);

  // round trip: residual bounded by the adjacent CDF increments
  rng::Engine rng(17);
  dist::MixtureMarginal mix;
  for (int c = 0; c < 7; ++c) mix.components.push_back({rng.uniform(-4.0, 4.0), rng.uniform(0.4, 1.5)});
  const dist::GridSpec grid = dist::default_grid(mix);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform_open();
    const auto r = dist::mixture_inverse_detailed(mix, p, grid);
    const double lo_gap = (r.idx > 0) ? dist::mixture_cdf(mix, grid.node(r.idx)) - dist::mixture_cdf(mix, grid.node(r.idx - 1)) : 1.0;
    const double hi_gap = (r.idx + 1 < grid.count)
                              ? dist::mixture_cdf(mix, grid.node(r.idx + 1)) - dist::mixture_cdf(mix, grid.node(r.idx))
                              : 1.0;
    CHECK(r.residual <= std::max(lo_gap, hi_gap) + 1e-15);
  }
  // bisection oracle agrees with the grid inverse within one node
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform_open();
    const double exact = dist::mixture_inverse_exact(mix, p, 1e-12);
    CHECK(std::fabs(dist::mixture_inverse(mix, p, grid) - exact) <= grid.spacing() + 1e-9);
  }
}
