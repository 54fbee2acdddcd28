#include "emcopp/archive.hpp"

#include <cmath>

#include "emcopp/error.hpp"

namespace emcopp {

void ForecastCase::validate() const {
  if (members.empty()) {
    throw DataError("forecast " + verification_date.to_iso() +
                    ": no margins");
  }
  const std::size_t m = members.begin()->second.size();
  if (m < 2) {
    throw DataError("forecast " + verification_date.to_iso() +
                    ": needs at least 2 members, got " + std::to_string(m));
  }
  const std::int64_t lead_days = verification_date - init_date;
  for (const auto& [id, values] : members) {
    if (values.size() != m) {
      throw DataError("forecast " + verification_date.to_iso() + " margin " +
                      id.to_string() + ": ragged member count " +
                      std::to_string(values.size()) + " vs " +
                      std::to_string(m));
    }
    if (id.lead_hours != lead_days * 24) {
      throw DataError("forecast " + verification_date.to_iso() + " margin " +
                      id.to_string() +
                      ": lead time inconsistent with date pair");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw DataError("forecast " + verification_date.to_iso() +
                        " margin " + id.to_string() + " member " +
                        std::to_string(i + 1) + ": non-finite value");
      }
    }
  }
}

void Archive::add_forecast(ForecastCase fc) {
  fc.validate();
  if (forecasts_.count(fc.verification_date)) {
    throw DataError("duplicate forecast for verification date " +
                    fc.verification_date.to_iso());
  }
  bool universe_changed = false;
  for (const auto& [id, values] : fc.members) {
    universe_changed |= margin_set_.insert(id).second;
  }
  if (universe_changed) {
    margins_.assign(margin_set_.begin(), margin_set_.end());
    reduced_margins_.clear();
    for (const auto& id : margins_) {
      ReducedMarginId r = id.reduced();
      if (reduced_margins_.empty() || reduced_margins_.back() != r) {
        reduced_margins_.push_back(std::move(r));
      }
    }
  }
  forecasts_.emplace(fc.verification_date, std::move(fc));
}

void Archive::add_observation(ObservationRecord obs) {
  if (observations_.count(obs.date)) {
    throw DataError("duplicate observation record for date " +
                    obs.date.to_iso());
  }
  for (const auto& [id, value] : obs.values) {
    if (!std::isfinite(value)) {
      throw DataError("observation " + obs.date.to_iso() + " margin " +
                      id.to_string() + ": non-finite value");
    }
  }
  observations_.emplace(obs.date, std::move(obs));
}

const ForecastCase* Archive::find_forecast(Date verification_date) const {
  auto it = forecasts_.find(verification_date);
  return it == forecasts_.end() ? nullptr : &it->second;
}

const ObservationRecord* Archive::find_observation(Date date) const {
  auto it = observations_.find(date);
  return it == observations_.end() ? nullptr : &it->second;
}

bool Archive::observation_complete(Date date) const {
  const ObservationRecord* obs = find_observation(date);
  if (obs == nullptr) return false;
  for (const auto& id : reduced_margins_) {
    if (obs->find(id) == nullptr) return false;
  }
  return true;
}

std::vector<Date> Archive::complete_observation_dates(
    std::optional<Date> before) const {
  std::vector<Date> dates;
  for (const auto& [date, obs] : observations_) {
    if (before && date >= *before) break;
    if (observation_complete(date)) dates.push_back(date);
  }
  return dates;
}

std::vector<Date> Archive::paired_dates_before(Date t0) const {
  std::vector<Date> dates;
  for (const auto& [date, fc] : forecasts_) {
    if (date >= t0) break;
    if (observation_complete(date)) dates.push_back(date);
  }
  return dates;
}

std::vector<Date> Archive::partial_dates() const {
  std::vector<Date> dates;
  for (const auto& [date, fc] : forecasts_) {
    if (fc.members.size() != margins_.size()) dates.push_back(date);
  }
  for (const auto& [date, obs] : observations_) {
    if (!observation_complete(date) &&
        (dates.empty() || dates.back() != date)) {
      bool already = false;
      for (Date d : dates) {
        if (d == date) {
          already = true;
          break;
        }
      }
      if (!already) dates.push_back(date);
    }
  }
  return dates;
}

}  // namespace emcopp
