#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace longtail::data {

/// ISO-8601 date <-> days since 1970-01-01.
std::int64_t parse_date(const std::string& iso);
std::string format_date(std::int64_t days);

inline constexpr double kDaysPerYear = 365.25;

struct Observation {
  std::int64_t time = 0;   // days since epoch
  double value = 0.0;      // latent-sign units (negated when sign_flip)
  double raw_value = 0.0;  // original units
};

struct Subject {
  std::string id;
  std::int64_t birth_date = 0;
  std::vector<Observation> observations;  // strictly increasing in time

  std::size_t n_obs() const { return observations.size(); }
};

struct Dataset {
  std::vector<Subject> subjects;
  double threshold_u = -std::numeric_limits<double>::infinity();  // post-sign units
  bool sign_flip = false;
  std::int64_t t_max = 0;  // max observation time
  std::int64_t t0 = 0;     // min observation time (start of the data window)

  std::size_t n_subjects() const { return subjects.size(); }
  std::size_t n_obs() const;
  /// Years since the data-window start; the time covariate of the rate model.
  double t_years(std::int64_t t) const { return static_cast<double>(t - t0) / kDaysPerYear; }
};

/// (subject_index, obs_index) pairs split by value > u (above) vs value <= u
/// (below; ties at the threshold are censored).
struct CensorPartition {
  std::vector<std::pair<std::size_t, std::size_t>> above;
  std::vector<std::pair<std::size_t, std::size_t>> below;
};

/// Reads `subject_id,date,value,birth_date[,competition]` CSV. When the
/// competition column is present only each subject's best (max post-sign)
/// value per competition is kept. Duplicate (subject, date) rows are
/// rejected. Subjects come out sorted by id, observations by date.
Dataset ingest_csv(const std::string& path, bool sign_flip);

/// Drops subjects with no observation above u and subjects with n_i <= m,
/// records u, recomputes the window. Throws data_error when nothing survives.
Dataset preprocess(const Dataset& d, double u, std::size_t m);

/// k_m = #{subjects with n_i <= m} among subjects with at least one value
/// above u, for m = 0..max n_i. The threshold-m diagnostic curve.
std::vector<std::size_t> km_curve(const Dataset& d, double u);

CensorPartition partition_censored(const Dataset& d);

}  // namespace longtail::data
