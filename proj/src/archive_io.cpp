#include "emcopp/archive_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "emcopp/error.hpp"

namespace emcopp {

namespace {

constexpr const char* kForecastHeader =
    "date,init_date,variable,station,lead_hours,member,value";
constexpr const char* kObservationHeader = "date,variable,station,value";

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

Date parse_date_field(const std::filesystem::path& path, int line,
                      const std::string& field, const char* name) {
  try {
    return Date::from_iso(field);
  } catch (const std::invalid_argument& e) {
    parse_fail(path, line, std::string("bad ") + name + ": " + e.what());
  }
}

double parse_value(const std::filesystem::path& path, int line,
                   const std::string& field, const char* name) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &consumed);
  } catch (const std::exception&) {
    parse_fail(path, line, std::string("field '") + name + "' is not a number: '" + field + "'");
  }
  if (consumed != field.size()) {
    parse_fail(path, line, std::string("trailing characters in field '") + name + "': '" + field + "'");
  }
  return v;
}

long parse_int(const std::filesystem::path& path, int line,
               const std::string& field, const char* name) {
  std::size_t consumed = 0;
  long v = 0;
  try {
    v = std::stol(field, &consumed);
  } catch (const std::exception&) {
    parse_fail(path, line, std::string("field '") + name + "' is not an integer: '" + field + "'");
  }
  if (consumed != field.size()) {
    parse_fail(path, line, std::string("trailing characters in field '") + name + "': '" + field + "'");
  }
  return v;
}

void check_identifier(const std::filesystem::path& path, int line,
                      const std::string& field, const char* name) {
  if (field.empty()) {
    parse_fail(path, line, std::string("empty field '") + name + "'");
  }
}

struct ForecastRows {
  Date init_date;
  // margin -> member index -> value
  std::map<MarginId, std::map<long, double>> members;
  bool init_seen = false;
};

}  // namespace

Archive load_archive(const std::filesystem::path& forecasts_path,
                     const std::filesystem::path& observations_path,
                     ArchiveFormat format) {
  if (format != ArchiveFormat::Csv) {
    throw ConfigError("load_archive: unsupported format");
  }

  Archive archive;

  {
    std::ifstream in(forecasts_path);
    if (!in) throw DataError("cannot open " + forecasts_path.string());
    std::string line;
    int line_no = 0;
    // Grouped per verification date before insertion so member rows may
    // arrive in any order within a date block.
    std::map<Date, ForecastRows> pending;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1) {
        if (line != kForecastHeader) {
          parse_fail(forecasts_path, line_no,
                     std::string("expected header '") + kForecastHeader + "'");
        }
        continue;
      }
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv(line);
      if (f.size() != 7) {
        parse_fail(forecasts_path, line_no,
                   "expected 7 fields, got " + std::to_string(f.size()));
      }
      const Date date = parse_date_field(forecasts_path, line_no, f[0], "date");
      const Date init =
          parse_date_field(forecasts_path, line_no, f[1], "init_date");
      check_identifier(forecasts_path, line_no, f[2], "variable");
      check_identifier(forecasts_path, line_no, f[3], "station");
      const long lead = parse_int(forecasts_path, line_no, f[4], "lead_hours");
      const long member = parse_int(forecasts_path, line_no, f[5], "member");
      const double value = parse_value(forecasts_path, line_no, f[6], "value");
      if (member < 1) {
        parse_fail(forecasts_path, line_no, "member index must be >= 1");
      }
      if (!std::isfinite(value)) {
        parse_fail(forecasts_path, line_no, "non-finite value");
      }
      ForecastRows& rows = pending[date];
      if (rows.init_seen && rows.init_date != init) {
        parse_fail(forecasts_path, line_no,
                   "conflicting init_date for verification date " +
                       date.to_iso());
      }
      rows.init_date = init;
      rows.init_seen = true;
      const MarginId margin{f[2], f[3], static_cast<int>(lead)};
      auto [it, inserted] =
          rows.members[margin].emplace(member, value);
      if (!inserted) {
        parse_fail(forecasts_path, line_no,
                   "duplicate member " + std::to_string(member) +
                       " for date " + date.to_iso() + " margin " +
                       margin.to_string());
      }
    }
    for (auto& [date, rows] : pending) {
      ForecastCase fc;
      fc.verification_date = date;
      fc.init_date = rows.init_date;
      for (auto& [margin, by_member] : rows.members) {
        std::vector<double> values;
        values.reserve(by_member.size());
        long expected = 1;
        for (const auto& [member, value] : by_member) {
          if (member != expected) {
            throw DataError(forecasts_path.string() + ": date " +
                            date.to_iso() + " margin " + margin.to_string() +
                            ": member indices not contiguous from 1");
          }
          values.push_back(value);
          ++expected;
        }
        fc.members.emplace(margin, std::move(values));
      }
      archive.add_forecast(std::move(fc));
    }
  }

  {
    std::ifstream in(observations_path);
    if (!in) throw DataError("cannot open " + observations_path.string());
    std::string line;
    int line_no = 0;
    std::map<Date, ObservationRecord> pending;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1) {
        if (line != kObservationHeader) {
          parse_fail(observations_path, line_no,
                     std::string("expected header '") + kObservationHeader +
                         "'");
        }
        continue;
      }
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv(line);
      if (f.size() != 4) {
        parse_fail(observations_path, line_no,
                   "expected 4 fields, got " + std::to_string(f.size()));
      }
      const Date date =
          parse_date_field(observations_path, line_no, f[0], "date");
      check_identifier(observations_path, line_no, f[1], "variable");
      check_identifier(observations_path, line_no, f[2], "station");
      const double value =
          parse_value(observations_path, line_no, f[3], "value");
      if (!std::isfinite(value)) {
        parse_fail(observations_path, line_no, "non-finite value");
      }
      ObservationRecord& rec = pending[date];
      rec.date = date;
      const ReducedMarginId margin{f[1], f[2]};
      auto [it, inserted] = rec.values.emplace(margin, value);
      if (!inserted) {
        parse_fail(observations_path, line_no,
                   "duplicate observation for date " + date.to_iso() +
                       " margin " + margin.to_string());
      }
    }
    for (auto& [date, rec] : pending) {
      archive.add_observation(std::move(rec));
    }
  }

  return archive;
}

void write_archive(const Archive& archive,
                   const std::filesystem::path& forecasts_path,
                   const std::filesystem::path& observations_path,
                   ArchiveFormat format) {
  if (format != ArchiveFormat::Csv) {
    throw ConfigError("write_archive: unsupported format");
  }
  // Reject non-finite values up front rather than emitting a broken file.
  for (const auto& [date, fc] : archive.forecasts()) {
    for (const auto& [margin, values] : fc.members) {
      for (double v : values) {
        if (!std::isfinite(v)) {
          throw DataError("write_archive: non-finite member value on " +
                          date.to_iso() + " margin " + margin.to_string());
        }
      }
    }
  }
  for (const auto& [date, rec] : archive.observations()) {
    for (const auto& [margin, v] : rec.values) {
      if (!std::isfinite(v)) {
        throw DataError("write_archive: non-finite observation on " +
                        date.to_iso() + " margin " + margin.to_string());
      }
    }
  }

  std::ofstream forecasts(forecasts_path, std::ios::trunc);
  if (!forecasts) {
    throw DataError("cannot write " + forecasts_path.string());
  }
  forecasts << kForecastHeader << '\n';
  for (const auto& [date, fc] : archive.forecasts()) {
    for (const auto& [margin, values] : fc.members) {
      for (std::size_t m = 0; m < values.size(); ++m) {
        forecasts << date.to_iso() << ',' << fc.init_date.to_iso() << ','
                  << margin.variable << ',' << margin.station << ','
                  << margin.lead_hours << ',' << m + 1 << ','
                  << format_value(values[m]) << '\n';
      }
    }
  }
  if (!forecasts.flush()) {
    throw DataError("failed writing " + forecasts_path.string());
  }

  std::ofstream observations(observations_path, std::ios::trunc);
  if (!observations) {
    throw DataError("cannot write " + observations_path.string());
  }
  observations << kObservationHeader << '\n';
  for (const auto& [date, rec] : archive.observations()) {
    for (const auto& [margin, value] : rec.values) {
      observations << date.to_iso() << ',' << margin.variable << ','
                   << margin.station << ',' << format_value(value) << '\n';
    }
  }
  if (!observations.flush()) {
    throw DataError("failed writing " + observations_path.string());
  }
}

}  // namespace emcopp
