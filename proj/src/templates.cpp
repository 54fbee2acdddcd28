#include "emcopp/templates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emcopp/emos.hpp"
#include "emcopp/error.hpp"
#include "emcopp/rng.hpp"
#include "emcopp/stats.hpp"

namespace emcopp {

ReducedMembers reduce_members(const ForecastCase& fc) {
  ReducedMembers reduced;
  for (const auto& [id, values] : fc.members) {
    auto [it, inserted] = reduced.emplace(id.reduced(), values);
    if (!inserted) {
      throw DataError("reduce_members: duplicate reduced margin " +
                      id.reduced().to_string() + " in forecast " +
                      fc.verification_date.to_iso());
    }
  }
  return reduced;
}

RankTemplate ecc_template(const ForecastCase& forecast,
                          std::uint64_t rng_seed) {
  return derive_template(forecast.members, rng_seed, RankTemplate::Source::Ecc);
}

std::vector<Date> clark_window_dates(const Archive& archive,
                                     Date verification_date, int window_days) {
  if (archive.empty()) {
    throw DataError("clark_window_dates: empty archive");
  }
  if (window_days < 0 || window_days > 182) {
    throw std::invalid_argument("clark_window_dates: window_days out of range");
  }
  const int target_doy = verification_date.day_of_year_365();
  const int forecast_year = verification_date.year();
  std::vector<Date> candidates;
  for (Date date : archive.complete_observation_dates()) {
    if (date.year() == forecast_year) continue;
    if (doy_distance_365(date.day_of_year_365(), target_doy) <= window_days) {
      candidates.push_back(date);
    }
  }
  return candidates;
}

std::vector<Date> random_schaake_dates(const Archive& archive, Date before,
                                       std::size_t n, std::uint64_t rng_seed) {
  if (n == 0) {
    throw std::invalid_argument("random_schaake_dates: n must be positive");
  }
  std::vector<Date> pool = archive.complete_observation_dates(before);
  if (pool.size() < n) {
    throw DataError("random_schaake_dates: need " + std::to_string(n) +
                    " complete-observation dates before " + before.to_iso() +
                    ", archive has " + std::to_string(pool.size()));
  }
  Rng rng(rng_seed);
  // Partial Fisher-Yates: the first n slots are a uniform sample without
  // replacement.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

ReducedMembers standardize(const ReducedMembers& members,
                           const MarginStandardizer& standardizer) {
  ReducedMembers out = members;
  for (auto& [id, values] : out) {
    auto it = standardizer.by_margin.find(id);
    if (it == standardizer.by_margin.end()) continue;
    const auto& [center, scale] = it->second;
    if (!(scale > 0.0)) {
      throw std::invalid_argument("standardize: nonpositive scale for margin " +
                                  id.to_string());
    }
    for (double& v : values) v = (v - center) / scale;
  }
  return out;
}

MarginStandardizer fit_margin_standardizer(const Archive& archive,
                                           Date before) {
  std::map<ReducedMarginId, std::vector<double>> means;
  for (const auto& [date, fc] : archive.forecasts()) {
    if (date >= before) break;
    if (!archive.observation_complete(date)) continue;
    for (const auto& [id, values] : fc.members) {
      means[id.reduced()].push_back(summarize_members(values).mean);
    }
  }
  if (means.empty()) {
    throw DataError("fit_margin_standardizer: no paired dates before " +
                    before.to_iso());
  }
  MarginStandardizer standardizer;
  for (const auto& [id, values] : means) {
    const double center = mean(values);
    double scale = sample_sd(values);
    if (!(scale > 0.0)) scale = 1.0;
    standardizer.by_margin[id] = {center, scale};
  }
  return standardizer;
}

double similarity(const ReducedMembers& a, const ReducedMembers& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument(
        "similarity: ensembles must share a non-empty margin set");
  }
  double mean_gap_sq = 0.0;
  double sd_gap_sq = 0.0;
  auto ita = a.begin();
  auto itb = b.begin();
  for (; ita != a.end(); ++ita, ++itb) {
    if (ita->first != itb->first) {
      throw std::invalid_argument("similarity: margin mismatch: " +
                                  ita->first.to_string() + " vs " +
                                  itb->first.to_string());
    }
    if (ita->second.size() != itb->second.size()) {
      throw std::invalid_argument("similarity: member count mismatch at " +
                                  ita->first.to_string());
    }
    if (ita->second.size() < 2) {
      throw std::invalid_argument(
          "similarity: need at least 2 members per margin");
    }
    const EnsembleSummary sa = summarize_members(ita->second);
    const EnsembleSummary sb = summarize_members(itb->second);
    mean_gap_sq += (sa.mean - sb.mean) * (sa.mean - sb.mean);
    sd_gap_sq += (sa.sd - sb.sd) * (sa.sd - sb.sd);
  }
  const double l_star = static_cast<double>(a.size());
  return std::sqrt(mean_gap_sq / l_star + sd_gap_sq / l_star);
}

double standardize_similarity(double delta) {
  if (!(delta >= 0.0)) {
    throw std::invalid_argument(
        "standardize_similarity: delta must be nonnegative");
  }
  return std::exp(-delta);
}

std::vector<SimilarityScore> simschaake_dates(
    const Archive& archive, const ForecastCase& current, std::size_t n,
    std::size_t training_length, const MarginStandardizer* standardizer) {
  if (n == 0) {
    throw std::invalid_argument("simschaake_dates: n must be positive");
  }
  const std::vector<Date> eligible =
      archive.paired_dates_before(current.init_date);
  const std::size_t required = std::max(n, training_length);
  if (eligible.size() < required) {
    throw DataError("simschaake_dates: feasibility requires max(N=" +
                    std::to_string(n) +
                    ", Lambda=" + std::to_string(training_length) + ") = " +
                    std::to_string(required) + " eligible dates before " +
                    current.init_date.to_iso() + ", archive has D = " +
                    std::to_string(eligible.size()));
  }

  ReducedMembers current_members = reduce_members(current);
  if (standardizer != nullptr) {
    current_members = standardize(current_members, *standardizer);
  }

  std::vector<SimilarityScore> scores;
  scores.reserve(eligible.size());
  for (Date date : eligible) {
    ReducedMembers candidate = reduce_members(*archive.find_forecast(date));
    if (standardizer != nullptr) {
      candidate = standardize(candidate, *standardizer);
    }
    const double delta = similarity(current_members, candidate);
    scores.push_back({date, delta, standardize_similarity(delta)});
  }

  const auto more_similar = [](const SimilarityScore& x,
                               const SimilarityScore& y) {
    if (x.delta != y.delta) return x.delta < y.delta;
    return x.candidate_date < y.candidate_date;
  };
  std::partial_sort(scores.begin(), scores.begin() + static_cast<long>(n),
                    scores.end(), more_similar);
  scores.resize(n);
  return scores;
}

RankTemplate observation_template(const Archive& archive,
                                  const std::vector<Date>& dates,
                                  const std::vector<MarginId>& margins,
                                  std::uint64_t rng_seed,
                                  RankTemplate::Source source) {
  if (dates.empty()) {
    throw std::invalid_argument("observation_template: no dates");
  }
  if (margins.empty()) {
    throw std::invalid_argument("observation_template: no margins");
  }
  std::map<MarginId, std::vector<double>> data;
  for (const MarginId& margin : margins) {
    std::vector<double> values;
    values.reserve(dates.size());
    for (Date date : dates) {
      const ObservationRecord* obs = archive.find_observation(date);
      const double* y = obs == nullptr ? nullptr : obs->find(margin);
      if (y == nullptr) {
        throw DataError("observation_template: missing observation on " +
                        date.to_iso() + " for margin " + margin.to_string());
      }
      values.push_back(*y);
    }
    data.emplace(margin, std::move(values));
  }
  RankTemplate tmpl = derive_template(data, rng_seed, source);
  tmpl.source_dates = dates;
  return tmpl;
}

}  // namespace emcopp
