#pragma once

#include <cstdint>
#include <vector>

#include "longtail/dist.hpp"

namespace longtail::detail {

/// CDF and density of an equal-weight Gaussian mixture with a shared sd,
/// tabulated over a regular grid. Each component only touches the nodes
/// within +/- 9.5 sd of its mean; nodes above that window are credited an
/// exact 1 through a suffix count, so the tabulated CDF matches the full sum
/// to ~1e-16 absolute. Supports O(window) incremental component swaps, which
/// is what makes per-subject MCMC blocks affordable.
class GridTable {
 public:
  explicit GridTable(const dist::GridSpec& g);

  void rebuild(const std::vector<double>& means, double sd);
  /// Swaps a subset of components; sd must equal the sd of the last rebuild.
  void swap_components(const std::vector<double>& remove, const std::vector<double>& add);

  double cdf(std::size_t k) const { return (cdf_window_[k] + suffix_[k]) * inv_n_; }
  double pdf(std::size_t k) const { return pdf_window_[k] * inv_n_; }
  double node(std::size_t k) const { return grid_.node(k); }
  std::size_t count() const { return grid_.count; }

  /// Grid argmin of |CDF - p|: the smaller-residual side of the bracketing
  /// pair (ties to the upper node). Returns false when p falls outside the
  /// CDF range attained on the grid.
  bool invert(double p, std::size_t& idx) const;

 private:
  void add_component(double mean, double sign);

  dist::GridSpec grid_;
  double sd_ = 1.0;
  double inv_n_ = 0.0;
  std::size_t n_components_ = 0;
  std::vector<double> cdf_window_;
  std::vector<double> pdf_window_;
  std::vector<double> suffix_;
};

}  // namespace longtail::detail
