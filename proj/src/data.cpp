#include "longtail/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "longtail/errors.hpp"

namespace longtail::data {

namespace {

// Days from civil date (Howard Hinnant's algorithm), valid across the Gregorian calendar.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw data_error("row " + std::to_string(row) + ": unparsable number '" + s + "'");
  return v;
}

}  // namespace

std::int64_t parse_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      std::sscanf(iso.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
    throw data_error("unparsable date '" + iso + "' (expected YYYY-MM-DD)");
  return days_from_civil(y, m, d);
}

std::string format_date(std::int64_t days) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::size_t Dataset::n_obs() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.n_obs();
  return n;
}

Dataset ingest_csv(const std::string& path, bool sign_flip) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("'" + path + "': empty file, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool has_competition = false;
  if (line == "subject_id,date,value,birth_date")
    has_competition = false;
  else if (line == "subject_id,date,value,birth_date,competition")
    has_competition = true;
  else
    throw data_error("'" + path + "': unexpected header '" + line + "'");

  struct Row {
    std::int64_t date;
    double value;  // post-sign
    double raw;
    std::string competition;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::map<std::string, std::int64_t> births;

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    const std::size_t expected = has_competition ? 5u : 4u;
    if (fields.size() != expected)
      throw data_error("row " + std::to_string(row_no) + ": expected " + std::to_string(expected) +
                       " fields, got " + std::to_string(fields.size()));
    const std::string& id = fields[0];
    if (id.empty()) throw data_error("row " + std::to_string(row_no) + ": empty subject_id");
    std::int64_t date, birth;
    try {
      date = parse_date(fields[1]);
      birth = parse_date(fields[3]);
    } catch (const data_error& e) {
      throw data_error("row " + std::to_string(row_no) + ": " + e.what());
    }
    const double raw = parse_double(fields[2], row_no);
    std::string comp = has_competition ? fields[4] : std::string{};
    if (has_competition && comp.empty())
      throw data_error("row " + std::to_string(row_no) + ": empty competition field");
    auto [it, inserted] = births.emplace(id, birth);
    if (!inserted && it->second != birth)
      throw data_error("row " + std::to_string(row_no) + ": inconsistent birth_date for subject '" + id + "'");
    rows[id].push_back(Row{date, sign_flip ? -raw : raw, raw, std::move(comp)});
  }

  Dataset out;
  out.sign_flip = sign_flip;
  for (auto& [id, rs] : rows) {
    if (has_competition) {
      // Competition maxima: keep each subject's best (max post-sign) value per competition.
      std::map<std::string, Row*> best;
      for (auto& r : rs) {
        auto [it, inserted] = best.emplace(r.competition, &r);
        if (!inserted && r.value > it->second->value) it->second = &r;
      }
      std::vector<Row> kept;
      kept.reserve(best.size());
      for (auto& [comp, r] : best) kept.push_back(*r);
      rs = std::move(kept);
    }
    std::sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rs.size(); ++i)
      if (rs[i].date == rs[i - 1].date)
        throw data_error("duplicate (subject, date) for '" + id + "' on " + format_date(rs[i].date));
    Subject s;
    s.id = id;
    s.birth_date = births[id];
    for (const auto& r : rs) s.observations.push_back(Observation{r.date, r.value, r.raw});
    out.subjects.push_back(std::move(s));
  }

  out.t_max = std::numeric_limits<std::int64_t>::min();
  out.t0 = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : out.subjects)
    for (const auto& o : s.observations) {
      out.t_max = std::max(out.t_max, o.time);
      out.t0 = std::min(out.t0, o.time);
    }
  if (out.subjects.empty()) {
    out.t_max = 0;
    out.t0 = 0;
  }
  return out;
}

Dataset preprocess(const Dataset& d, double u, std::size_t m) {
  Dataset out;
  out.sign_flip = d.sign_flip;
  out.threshold_u = u;
  for (const auto& s : d.subjects) {
    const bool exceeds =
        std::any_of(s.observations.begin(), s.observations.end(), [&](const Observation& o) { return o.value > u; });
    if (!exceeds || s.n_obs() <= m) continue;
    out.subjects.push_back(s);
  }
  if (out.subjects.empty()) throw data_error("no subjects survive filters");
  out.t_max = std::numeric_limits<std::int64_t>::min();
  out.t0 = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : out.subjects)
    for (const auto& o : s.observations) {
      out.t_max = std::max(out.t_max, o.time);
      out.t0 = std::min(out.t0, o.time);
    }
  return out;
}

std::vector<std::size_t> km_curve(const Dataset& d, double u) {
  std::vector<std::size_t> counts;  // n_i per exceeding subject
  std::size_t max_n = 0;
  for (const auto& s : d.subjects) {
    const bool exceeds =
        std::any_of(s.observations.begin(), s.observations.end(), [&](const Observation& o) { return o.value > u; });
    if (!exceeds) continue;
    counts.push_back(s.n_obs());
    max_n = std::max(max_n, s.n_obs());
  }
  std::vector<std::size_t> km(max_n + 1, 0);
  for (std::size_t m = 0; m <= max_n; ++m)
    km[m] = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [&](std::size_t n) { return n <= m; }));
  return km;
}

CensorPartition partition_censored(const Dataset& d) {
  CensorPartition p;
  for (std::size_t i = 0; i < d.subjects.size(); ++i)
    for (std::size_t j = 0; j < d.subjects[i].observations.size(); ++j) {
      if (d.subjects[i].observations[j].value > d.threshold_u)
        p.above.emplace_back(i, j);
      else
        p.below.emplace_back(i, j);
    }
  return p;
}

}  // namespace longtail::data
