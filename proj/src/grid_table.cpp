#include "grid_table.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace longtail::detail {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kWindowSd = 9.5;

// Phi(x+d) - Phi(x) = phi(x) * A(x) with A a degree-6 polynomial in x whose
// coefficients depend only on the node spacing d (Taylor expansion through
// d^7; the d^8 remainder is what bounds the anchor spans below).
struct IncrementPoly {
  double c[7];
  explicit IncrementPoly(double d) {
    const double d2 = d * d, d3 = d2 * d, d4 = d3 * d, d5 = d4 * d, d6 = d5 * d, d7 = d6 * d;
    c[0] = d - d3 / 6.0 + d5 / 40.0 - d7 / 336.0;
    c[1] = -d2 / 2.0 + d4 / 8.0 - d6 / 48.0;
    c[2] = d3 / 6.0 - d5 / 20.0 + d7 / 112.0;
    c[3] = -d4 / 24.0 + d6 / 72.0;
    c[4] = d5 / 120.0 - d7 / 336.0;
    c[5] = -d6 / 720.0;
    c[6] = d7 / 5040.0;
  }
  double operator()(double x) const {
    return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * (c[4] + x * (c[5] + x * c[6])))));
  }
};

// Largest span over which accumulated d^8 remainders stay below ~1e-14.
std::size_t anchor_span(double d) {
  const double per_step = 1.2 * std::pow(d, 8.0) / 40320.0;
  const double k = 1e-14 / per_step;
  if (k >= 64.0) return 64;
  if (k < 6.0) return 0;  // series not worth it; caller falls back to erfc
  return static_cast<std::size_t>(k);
}

}  // namespace

GridTable::GridTable(const dist::GridSpec& g)
    : grid_(g), cdf_window_(g.count, 0.0), pdf_window_(g.count, 0.0), suffix_(g.count, 0.0) {}

void GridTable::rebuild(const std::vector<double>& means, double sd) {
  std::fill(cdf_window_.begin(), cdf_window_.end(), 0.0);
  std::fill(pdf_window_.begin(), pdf_window_.end(), 0.0);
  std::fill(suffix_.begin(), suffix_.end(), 0.0);
  sd_ = sd;
  n_components_ = means.size();
  inv_n_ = n_components_ ? 1.0 / static_cast<double>(n_components_) : 0.0;
  for (const double m : means) add_component(m, +1.0);
}

void GridTable::swap_components(const std::vector<double>& remove, const std::vector<double>& add) {
  for (const double m : remove) add_component(m, -1.0);
  for (const double m : add) add_component(m, +1.0);
}

void GridTable::add_component(double mean, double sign) {
  const double h = grid_.spacing();
  const double half = kWindowSd * sd_;
  const std::size_t count = grid_.count;

  // Nodes strictly above the window contribute an exact 1.
  double hi_edge = (mean + half - grid_.lo) / h;
  std::size_t k_hi;
  if (hi_edge < 0.0)
    k_hi = 0;
  else if (hi_edge >= static_cast<double>(count - 1))
    k_hi = count;
  else
    k_hi = static_cast<std::size_t>(hi_edge) + 1;
  for (std::size_t k = k_hi; k < count; ++k) suffix_[k] += sign;

  double lo_edge = (mean - half - grid_.lo) / h;
  std::size_t k_lo;
  if (lo_edge <= 0.0)
    k_lo = 0;
  else if (lo_edge >= static_cast<double>(count))
    return;
  else
    k_lo = static_cast<std::size_t>(lo_edge) + 1;
  if (k_lo >= k_hi) return;

  const double inv_sd = 1.0 / sd_;
  const double d = h * inv_sd;
  const std::size_t span = anchor_span(d);

  if (span == 0) {
    // Wide spacing relative to sd: windows are short, direct evaluation.
    for (std::size_t k = k_lo; k < k_hi; ++k) {
      const double x = (grid_.node(k) - mean) * inv_sd;
      cdf_window_[k] += sign * 0.5 * std::erfc(-x * kInvSqrt2);
      pdf_window_[k] += sign * kInvSqrt2Pi * std::exp(-0.5 * x * x) * inv_sd;
    }
    return;
  }

  const IncrementPoly poly(d);
  const double ratio_step = std::exp(-d * d);
  std::size_t k = k_lo;
  while (k < k_hi) {
    const std::size_t stop = std::min(k_hi, k + span);
    double x = (grid_.node(k) - mean) * inv_sd;
    double cdf = 0.5 * std::erfc(-x * kInvSqrt2);
    double density = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    double ratio = std::exp(-d * (x + 0.5 * d));  // phi(x+d)/phi(x)
    for (; k < stop; ++k) {
      cdf_window_[k] += sign * cdf;
      pdf_window_[k] += sign * density * inv_sd;
      cdf += density * poly(x);
      density *= ratio;
      ratio *= ratio_step;
      x += d;
    }
  }
}

bool GridTable::invert(double p, std::size_t& idx) const {
  const std::size_t last = grid_.count - 1;
  if (p < cdf(0) || p > cdf(last)) return false;
  std::size_t lo = 0, hi = last;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cdf(mid) < p)
      lo = mid + 1;
    else
      hi = mid;
  }
  idx = lo;
  if (lo > 0 && std::fabs(cdf(lo - 1) - p) < std::fabs(cdf(lo) - p)) idx = lo - 1;
  return true;
}

}  // namespace longtail::detail
