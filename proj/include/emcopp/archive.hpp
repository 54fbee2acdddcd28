#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "emcopp/types.hpp"

namespace emcopp {

// Date-indexed store of forecast cases and verifying observations across all
// margins. Forecasts are keyed by verification date (one case per date, i.e.
// a fixed prediction horizon per archive).
class Archive {
 public:
  // Both throw DataError on duplicate dates or invalid records.
  void add_forecast(ForecastCase fc);
  void add_observation(ObservationRecord obs);

  const std::map<Date, ForecastCase>& forecasts() const { return forecasts_; }
  const std::map<Date, ObservationRecord>& observations() const {
    return observations_;
  }

  const ForecastCase* find_forecast(Date verification_date) const;
  const ObservationRecord* find_observation(Date date) const;

  // Sorted union of all margins seen in forecasts.
  const std::vector<MarginId>& margins() const { return margins_; }
  const std::vector<ReducedMarginId>& reduced_margins() const {
    return reduced_margins_;
  }

  // True when an observation exists for `date` and covers every reduced
  // margin of the archive.
  bool observation_complete(Date date) const;

  // All complete-observation dates, optionally restricted to dates strictly
  // before `before`.
  std::vector<Date> complete_observation_dates(
      std::optional<Date> before = std::nullopt) const;

  // Dates strictly before `t0` with both a forecast and a complete
  // observation; its size is the quantity gating Schaake-type feasibility.
  std::vector<Date> paired_dates_before(Date t0) const;

  // Dates whose forecast misses some archive margin, or whose observation is
  // present but incomplete. Used for ingestion diagnostics.
  std::vector<Date> partial_dates() const;

  bool empty() const { return forecasts_.empty() && observations_.empty(); }

 private:
  std::map<Date, ForecastCase> forecasts_;
  std::map<Date, ObservationRecord> observations_;
  std::set<MarginId> margin_set_;
  std::vector<MarginId> margins_;
  std::vector<ReducedMarginId> reduced_margins_;
};

}  // namespace emcopp
