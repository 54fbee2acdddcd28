#include "emcopp/emos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "emcopp/error.hpp"
#include "emcopp/optimize.hpp"
#include "emcopp/stats.hpp"

namespace emcopp {

namespace {
constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;
}

double gaussian_crps(const PredictiveLaw& law, double y) {
  if (!(law.sigma > 0.0)) {
    throw std::invalid_argument("gaussian_crps: sigma must be positive");
  }
  const double z = (y - law.mu) / law.sigma;
  return law.sigma *
         (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

std::vector<double> sample_equidistant(const PredictiveLaw& law,
                                       std::size_t n_samples) {
  if (n_samples == 0) {
    throw std::invalid_argument("sample_equidistant: need at least 1 sample");
  }
  std::vector<double> samples(n_samples);
  const double denom = static_cast<double>(n_samples) + 1.0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    samples[n] =
        law.mu + law.sigma * normal_quantile(static_cast<double>(n + 1) / denom);
  }
  return samples;
}

EnsembleSummary summarize_members(std::span<const double> members) {
  EnsembleSummary s;
  s.mean = mean(members);
  s.sd = sample_sd(members);
  return s;
}

PredictiveLaw predictive_law(const EmosModel& model, const ForecastCase& fc) {
  auto it = fc.members.find(model.margin);
  if (it == fc.members.end()) {
    throw DataError("predictive_law: forecast " +
                    fc.verification_date.to_iso() + " lacks margin " +
                    model.margin.to_string());
  }
  const EnsembleSummary s = summarize_members(it->second);
  PredictiveLaw law;
  law.mu = model.a + model.b * s.mean;
  law.sigma = std::sqrt(model.c + model.d * s.sd * s.sd);
  return law;
}

namespace {

struct TrainingPair {
  Date date;
  double ens_mean;
  double ens_var;  // N-1 denominator
  double obs;
};

std::vector<TrainingPair> collect_training_pairs(const Archive& archive,
                                                 const MarginId& margin,
                                                 Date verification_date,
                                                 std::size_t window_length,
                                                 int lookback_factor) {
  std::vector<TrainingPair> pairs;
  const Date earliest =
      verification_date -
      static_cast<std::int64_t>(window_length) * lookback_factor;
  for (Date date = verification_date - 1; date >= earliest; date = date - 1) {
    const ForecastCase* fc = archive.find_forecast(date);
    if (fc == nullptr) continue;
    auto member_it = fc->members.find(margin);
    if (member_it == fc->members.end()) continue;
    const ObservationRecord* obs = archive.find_observation(date);
    if (obs == nullptr) continue;
    const double* y = obs->find(margin);
    if (y == nullptr) continue;
    const EnsembleSummary s = summarize_members(member_it->second);
    pairs.push_back({date, s.mean, s.sd * s.sd, *y});
    if (pairs.size() == window_length) break;
  }
  if (pairs.size() < window_length) {
    throw DataError("fit_emos: margin " + margin.to_string() +
                    ", verification " + verification_date.to_iso() + ": only " +
                    std::to_string(pairs.size()) + " usable training pairs of " +
                    std::to_string(window_length) + " within " +
                    std::to_string(window_length * lookback_factor) +
                    " days lookback");
  }
  return pairs;
}

// theta = (a, b, u, v) with c = floor + u^2, d = v^2.
double window_mean_crps(const std::vector<TrainingPair>& pairs,
                        const std::vector<double>& theta) {
  const double a = theta[0];
  const double b = theta[1];
  const double c = kEmosVarianceFloor + theta[2] * theta[2];
  const double d = theta[3] * theta[3];
  double total = 0.0;
  for (const TrainingPair& p : pairs) {
    const PredictiveLaw law{a + b * p.ens_mean,
                            std::sqrt(c + d * p.ens_var)};
    total += gaussian_crps(law, p.obs);
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace

EmosModel fit_emos(const Archive& archive, const MarginId& margin,
                   Date verification_date, std::size_t window_length,
                   const EmosFitOptions& options) {
  if (window_length < 2) {
    throw std::invalid_argument("fit_emos: window length must be >= 2");
  }
  const std::vector<TrainingPair> pairs = collect_training_pairs(
      archive, margin, verification_date, window_length,
      options.lookback_factor);

  const auto objective = [&pairs](const std::vector<double>& theta) {
    return window_mean_crps(pairs, theta);
  };

  // Moment-based cold start: a = mean residual at b = 1, c = residual
  // variance, d = 1.
  std::vector<double> residuals(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    residuals[i] = pairs[i].obs - pairs[i].ens_mean;
  }
  const double res_mean = mean(residuals);
  const double res_var = sample_variance(residuals);
  const double u0 = std::sqrt(std::max(res_var - kEmosVarianceFloor, 0.0));
  std::vector<std::vector<double>> starts;
  starts.push_back({res_mean, 1.0, u0, 1.0});
  if (options.warm_start) {
    const EmosModel& w = *options.warm_start;
    starts.push_back(
        {w.a, w.b, std::sqrt(std::max(w.c - kEmosVarianceFloor, 0.0)),
         std::sqrt(std::max(w.d, 0.0))});
  }

  SimplexOptions simplex_options;
  SimplexResult best;
  bool have_best = false;
  bool any_converged = false;
  for (const std::vector<double>& start : starts) {
    std::vector<double> steps(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) {
      steps[i] = 0.25 * std::max(std::fabs(start[i]), 0.5);
    }
    SimplexResult result = nelder_mead(objective, start, steps, simplex_options);
    any_converged |= result.converged;
    if (!have_best || result.value < best.value) {
      best = std::move(result);
      have_best = true;
    }
  }
  if (!any_converged || !std::isfinite(best.value)) {
    throw std::runtime_error(
        "fit_emos: optimizer did not converge for margin " +
        margin.to_string() + " at " + verification_date.to_iso() +
        " (best objective " + std::to_string(best.value) +
        ", final simplex diameter " + std::to_string(best.final_diameter) +
        ", " + std::to_string(best.evaluations) + " evaluations)");
  }

  EmosModel model;
  model.margin = margin;
  model.a = best.x[0];
  model.b = best.x[1];
  model.c = kEmosVarianceFloor + best.x[2] * best.x[2];
  model.d = best.x[3] * best.x[3];
  model.training_window.reserve(pairs.size());
  for (const TrainingPair& p : pairs) model.training_window.push_back(p.date);
  return model;
}

}  // namespace emcopp
