#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "emcopp/archive.hpp"
#include "emcopp/copula.hpp"
#include "emcopp/types.hpp"

namespace emcopp {

// Ensemble similarity between two forecasts against one candidate date.
struct SimilarityScore {
  Date candidate_date;
  double delta = 0.0;        // >= 0, lower is more similar
  double standardized = 1.0;  // exp(-delta), in (0, 1]
};

// Per reduced-margin affine standardization for mixed-unit similarity input.
struct MarginStandardizer {
  struct CenterScale {
    double center = 0.0;
    double scale = 1.0;  // > 0
  };
  std::map<ReducedMarginId, CenterScale> by_margin;
};

using ReducedMembers = std::map<ReducedMarginId, std::vector<double>>;

// Groups a forecast case's members by reduced margin. The case carries a
// single lead time, so the grouping is one-to-one.
ReducedMembers reduce_members(const ForecastCase& fc);

// Template from the raw ensemble itself; N = M by construction.
RankTemplate ecc_template(const ForecastCase& forecast, std::uint64_t rng_seed);

// Candidate dates for the Clark window variant: archive dates with complete
// observations whose 365-convention day-of-year lies within +-window_days of
// the verification date's (wrapping over year ends), excluding the entire
// verification year.
std::vector<Date> clark_window_dates(const Archive& archive,
                                     Date verification_date,
                                     int window_days = 7);

// N distinct complete-observation dates strictly before `before`, drawn
// uniformly without replacement. Throws DataError when fewer than n eligible
// dates exist.
std::vector<Date> random_schaake_dates(const Archive& archive, Date before,
                                       std::size_t n, std::uint64_t rng_seed);

// (value - center) / scale per reduced margin. Margins without an entry in
// the standardizer pass through unchanged.
ReducedMembers standardize(const ReducedMembers& members,
                           const MarginStandardizer& standardizer);

// Fits per reduced-margin center/scale from the ensemble means over all
// paired dates strictly before `before`.
MarginStandardizer fit_margin_standardizer(const Archive& archive, Date before);

// Similarity criterion between two ensembles over their shared reduced
// margins: sqrt of the mean squared gap in ensemble means plus the mean
// squared gap in ensemble standard deviations. Symmetric; zero iff all
// margin means and sds agree; invariant under member relabeling.
double similarity(const ReducedMembers& a, const ReducedMembers& b);

// exp(-delta), mapping [0, inf) onto (0, 1], strictly decreasing.
double standardize_similarity(double delta);

// The n most similar eligible dates (paired forecast + complete observation,
// strictly before the current init date), ranked by ascending delta with
// ties broken by earlier date. Feasibility requires at least
// max(n, training_length) eligible dates.
std::vector<SimilarityScore> simschaake_dates(
    const Archive& archive, const ForecastCase& current, std::size_t n,
    std::size_t training_length,
    const MarginStandardizer* standardizer = nullptr);

// Observation-based template: per margin, the verifying observations on the
// given dates in order, ranked via derive_template. Throws DataError naming
// the (date, margin) of any missing observation.
RankTemplate observation_template(const Archive& archive,
                                  const std::vector<Date>& dates,
                                  const std::vector<MarginId>& margins,
                                  std::uint64_t rng_seed,
                                  RankTemplate::Source source);

}  // namespace emcopp
