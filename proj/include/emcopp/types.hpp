#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "emcopp/date.hpp"

namespace emcopp {

// Reduced multi-index: (weather variable, station), used where lead time is
// irrelevant (observations, similarity search).
struct ReducedMarginId {
  std::string variable;
  std::string station;

  auto operator<=>(const ReducedMarginId&) const = default;
  std::string to_string() const { return variable + "/" + station; }
};

// Full multi-index: one (variable, station, lead time) combination. The
// triple is unique within a configuration.
struct MarginId {
  std::string variable;
  std::string station;
  int lead_hours = 0;

  ReducedMarginId reduced() const { return {variable, station}; }
  auto operator<=>(const MarginId&) const = default;
  std::string to_string() const {
    return variable + "/" + station + "/" + std::to_string(lead_hours) + "h";
  }
};

// One ensemble forecast instance: M members per margin, all margins sharing
// one (init date, verification date) pair.
struct ForecastCase {
  Date init_date;
  Date verification_date;
  std::map<MarginId, std::vector<double>> members;

  std::size_t member_count() const {
    return members.empty() ? 0 : members.begin()->second.size();
  }

  // Checks the type invariants: at least one margin, M >= 2 and uniform
  // across margins, all values finite, lead time consistent with the date
  // pair. Throws DataError on violation.
  void validate() const;
};

// Verifying observations for one date, keyed by reduced margin: the observed
// value of (variable, station) does not depend on the forecast lead time.
struct ObservationRecord {
  Date date;
  std::map<ReducedMarginId, double> values;

  const double* find(const ReducedMarginId& id) const {
    auto it = values.find(id);
    return it == values.end() ? nullptr : &it->second;
  }
  const double* find(const MarginId& id) const { return find(id.reduced()); }
};

}  // namespace emcopp
