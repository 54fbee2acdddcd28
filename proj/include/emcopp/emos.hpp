#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "emcopp/archive.hpp"
#include "emcopp/types.hpp"

namespace emcopp {

// Gaussian predictive law F = N(mu, sigma^2) for one margin.
struct PredictiveLaw {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
};

// Floor on the predictive variance intercept; keeps every fitted law proper.
inline constexpr double kEmosVarianceFloor = 1e-4;

// Fitted non-homogeneous Gaussian regression for one margin:
// N(a + b*xbar, c + d*s^2) with xbar/s the ensemble mean and standard
// deviation (N-1 denominator). Members are treated as exchangeable.
struct EmosModel {
  MarginId margin;
  double a = 0.0;  // intercept, variable units
  double b = 1.0;  // coefficient on the ensemble mean
  double c = 1.0;  // variance intercept, units^2; >= kEmosVarianceFloor
  double d = 0.0;  // coefficient on the ensemble variance; >= 0
  std::vector<Date> training_window;
};

// Closed-form CRPS of a Gaussian law against observation y:
// sigma * [ z(2*Phi(z) - 1) + 2*phi(z) - 1/sqrt(pi) ], z = (y - mu)/sigma.
double gaussian_crps(const PredictiveLaw& law, double y);

// Equidistant quantiles F^{-1}(n/(N+1)), n = 1..N; strictly increasing.
std::vector<double> sample_equidistant(const PredictiveLaw& law,
                                       std::size_t n_samples);

// Mean and N-1 standard deviation of an ensemble member tuple.
struct EnsembleSummary {
  double mean = 0.0;
  double sd = 0.0;
};
EnsembleSummary summarize_members(std::span<const double> members);

// Applies a fitted model to a forecast case. Throws DataError if the case
// lacks the model's margin.
PredictiveLaw predictive_law(const EmosModel& model, const ForecastCase& fc);

struct EmosFitOptions {
  // Previous fit used as an extra optimizer start point (sequential mode).
  std::optional<EmosModel> warm_start;
  // Missing pairs are skipped and the window extended backward, up to
  // lookback_factor * window_length days.
  int lookback_factor = 2;
};

// Fits EMOS for one margin by minimizing the mean Gaussian CRPS over the
// most recent `window_length` (forecast, observation) pairs strictly before
// `verification_date`. Throws DataError when too few pairs exist and
// std::runtime_error when the optimizer fails to converge.
EmosModel fit_emos(const Archive& archive, const MarginId& margin,
                   Date verification_date, std::size_t window_length,
                   const EmosFitOptions& options = {});

}  // namespace emcopp
