#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "emcopp/emos.hpp"
#include "emcopp/error.hpp"
#include "emcopp/rng.hpp"
#include "emcopp/scenario.hpp"
#include "emcopp/stats.hpp"
#include "emcopp/verify.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace emcopp;
using test_support::forecast_case;
using test_support::margin;
using test_support::observation;

TEST_SUITE("emos") {

TEST_CASE("gaussian_crps standard normal at the median") {
  // Frozen from the numeric Brier integral: 2*phi(0) - 1/sqrt(pi).
  const double expected = 0.23369497725510908;
  CHECK(gaussian_crps({0.0, 1.0}, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(oracle::gaussian_crps_numeric(0.0, 1.0, 0.0) ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("gaussian_crps matches the numeric integral on a grid") {
  for (double mu : {-4.0, 0.0, 2.5}) {
    for (double sigma : {0.3, 1.0, 4.0}) {
      for (double y : {-6.0, -0.5, 0.0, 3.0, 9.0}) {
        const double closed = gaussian_crps({mu, sigma}, y);
        const double numeric = oracle::gaussian_crps_numeric(mu, sigma, y);
        REQUIRE(closed >= 0.0);
        REQUIRE(std::fabs(closed - numeric) < 1e-6);
      }
    }
  }
}

TEST_CASE("gaussian_crps is translation invariant in (mu, y)") {
  for (double shift : {-17.0, 3.5, 240.0}) {
    CHECK(gaussian_crps({1.0 + shift, 2.0}, 0.3 + shift) ==
          doctest::Approx(gaussian_crps({1.0, 2.0}, 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian_crps tends to absolute error as sigma vanishes") {
  CHECK(gaussian_crps({2.0, 1e-8}, 5.0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(gaussian_crps({-1.0, 1e-8}, -4.5) == doctest::Approx(3.5).epsilon(1e-6));
  CHECK_THROWS_AS(gaussian_crps({0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sample_equidistant median for a single sample") {
  const std::vector<double> s = sample_equidistant({0.0, 1.0}, 1);
  REQUIRE(s.size() == 1);
  CHECK(s[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sample_equidistant standard normal quartiles") {
  const std::vector<double> s = sample_equidistant({0.0, 1.0}, 3);
  REQUIRE(s.size() == 3);
  CHECK(std::fabs(s[0] - oracle::normal_quantile_bisect(0.25)) < 1e-4);
  CHECK(std::fabs(s[1]) < 1e-10);
  CHECK(std::fabs(s[2] - oracle::normal_quantile_bisect(0.75)) < 1e-4);
  CHECK(s[0] == doctest::Approx(-0.67449).epsilon(1e-4));
}

TEST_CASE("sample_equidistant location-scale equivariance") {
  const std::vector<double> base = sample_equidistant({0.0, 1.0}, 3);
  const std::vector<double> scaled = sample_equidistant({10.0, 2.0}, 3);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(scaled[i] == doctest::Approx(10.0 + 2.0 * base[i]).epsilon(1e-12));
  }
}

TEST_CASE("sample_equidistant strictly increasing, rejects n = 0") {
  const std::vector<double> s = sample_equidistant({3.0, 0.7}, 41);
  for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i] > s[i - 1]);
  CHECK_THROWS_AS(sample_equidistant({0.0, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("predictive_law plugs in ensemble mean and variance") {
  const auto m = margin("vienna");
  const auto fc =
      forecast_case(Date(2010, 6, 1), {m}, {std::vector<double>{1.0, 3.0}});
  EmosModel model;
  model.margin = m;

  model.a = 0.0, model.b = 1.0, model.c = 1.0, model.d = 0.0;
  PredictiveLaw law = predictive_law(model, fc);
  CHECK(law.mu == doctest::Approx(2.0));
  CHECK(law.sigma == doctest::Approx(1.0));

  model.a = 2.0, model.b = 0.0, model.c = 0.25, model.d = 0.0;
  law = predictive_law(model, fc);
  CHECK(law.mu == doctest::Approx(2.0));
  CHECK(law.sigma == doctest::Approx(0.5));
}

TEST_CASE("predictive_law uses the n-1 ensemble variance") {
  const auto m = margin("vienna");
  const auto fc =
      forecast_case(Date(2010, 6, 1), {m}, {std::vector<double>{0.0, 2.0}});
  EmosModel model;
  model.margin = m;
  model.a = 0.0, model.b = 1.0, model.c = 0.0, model.d = 1.0;
  const PredictiveLaw law = predictive_law(model, fc);
  CHECK(law.mu == doctest::Approx(1.0));
  CHECK(law.sigma == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("predictive_law rejects a missing margin") {
  const auto fc = forecast_case(Date(2010, 6, 1), {margin("vienna")},
                                {std::vector<double>{1.0, 3.0}});
  EmosModel model;
  model.margin = margin("graz");
  CHECK_THROWS_AS(predictive_law(model, fc), DataError);
}

namespace {

// Archive with members scattered around a drifting signal and observations
// given by obs_fn(rng, ensemble mean).
template <typename ObsFn>
Archive signal_archive(const MarginId& m, Date first, int days, int n_members,
                       double member_sd, std::uint64_t seed, ObsFn obs_fn) {
  Rng rng(seed);
  Archive archive;
  for (int d = 0; d < days; ++d) {
    const Date date = first + d;
    const double signal = -10.0 + 20.0 * rng.next_double();
    std::vector<double> members(n_members);
    for (double& v : members) v = signal + member_sd * rng.next_gaussian();
    double ens_mean = 0.0;
    for (double v : members) ens_mean += v;
    ens_mean /= n_members;
    archive.add_forecast(forecast_case(date, {m}, {members}));
    archive.add_observation(observation(date, {m}, {obs_fn(rng, ens_mean)}));
  }
  return archive;
}

}  // namespace

TEST_CASE("fit_emos on a perfectly predictable window") {
  const auto m = margin("vienna");
  const Archive archive =
      signal_archive(m, Date(2010, 1, 1), 60, 5, 1.0, 99,
                     [](Rng&, double ens_mean) { return ens_mean; });
  const Date verification = Date(2010, 1, 1) + 60;
  const EmosModel model = fit_emos(archive, m, verification, 50);
  CHECK(std::fabs(model.a) < 0.02);
  CHECK(model.b == doctest::Approx(1.0).epsilon(0.02));
  CHECK(model.c >= kEmosVarianceFloor);
  CHECK(model.d >= 0.0);
  // Predictive variance collapses toward the floor.
  CHECK(model.c + model.d * 1.0 < 1e-2);
  REQUIRE(model.training_window.size() == 50);
  CHECK(model.training_window.front() == verification - 1);
}

TEST_CASE("fit_emos recovers known generating parameters") {
  const auto m = margin("vienna");
  const Archive archive = signal_archive(
      m, Date(2000, 1, 1), 2000, 50, 1.0, 4242, [](Rng& rng, double ens_mean) {
        return 5.0 + ens_mean + 2.0 * rng.next_gaussian();
      });
  const Date verification = Date(2000, 1, 1) + 2000;
  const EmosModel model = fit_emos(archive, m, verification, 2000);
  CHECK(std::fabs(model.a - 5.0) < 0.05);
  CHECK(std::fabs(model.b - 1.0) < 0.05);
  // Members are drawn with unit variance, so E[s^2] ~ 1 and the generating
  // total variance is 4.
  const double total_var = model.c + model.d * 1.0;
  CHECK(total_var == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("fit_emos centers on constant observations when the mean is flat") {
  // Symmetric members around zero leave mu = a; constant y pulls a to it and
  // the variance to the floor.
  const auto m = margin("vienna");
  Archive archive;
  for (int d = 0; d < 55; ++d) {
    const Date date = Date(2011, 3, 1) + d;
    archive.add_forecast(
        forecast_case(date, {m}, {std::vector<double>{-1.0, 1.0}}));
    archive.add_observation(observation(date, {m}, {7.25}));
  }
  const EmosModel model = fit_emos(archive, m, Date(2011, 3, 1) + 55, 50);
  const PredictiveLaw law = predictive_law(
      model, forecast_case(Date(2011, 3, 1) + 55, {m},
                           {std::vector<double>{-1.0, 1.0}}));
  CHECK(law.mu == doctest::Approx(7.25).epsilon(1e-3));
  CHECK(law.sigma * law.sigma >= kEmosVarianceFloor);
  CHECK(law.sigma < 0.05);
}

TEST_CASE("fit_emos reports the available pair count when data is short") {
  const auto m = margin("vienna");
  const Archive archive =
      signal_archive(m, Date(2010, 1, 1), 30, 5, 1.0, 7,
                     [](Rng&, double ens_mean) { return ens_mean; });
  CHECK_THROWS_WITH_AS(
      fit_emos(archive, m, Date(2010, 1, 1) + 30, 50),
      doctest::Contains("only 30 usable training pairs of 50"), DataError);
}

TEST_CASE("fit_emos skips missing observations and extends backward") {
  const auto m = margin("vienna");
  Archive archive;
  for (int d = 0; d < 60; ++d) {
    const Date date = Date(2012, 1, 1) + d;
    archive.add_forecast(
        forecast_case(date, {m}, {std::vector<double>{d - 1.0, d + 1.0}}));
    if (d % 5 != 0) {  // every fifth observation missing
      archive.add_observation(
          observation(date, {m}, {static_cast<double>(d)}));
    }
  }
  const EmosModel model = fit_emos(archive, m, Date(2012, 1, 1) + 60, 40);
  REQUIRE(model.training_window.size() == 40);
  for (Date d : model.training_window) {
    CHECK(archive.find_observation(d) != nullptr);
  }
}

TEST_CASE("fit_emos warm start reproduces the cold-start optimum") {
  const auto m = margin("vienna");
  const Archive archive = signal_archive(
      m, Date(2010, 1, 1), 120, 10, 1.0, 31337, [](Rng& rng, double ens_mean) {
        return 1.0 + 0.9 * ens_mean + 1.5 * rng.next_gaussian();
      });
  const Date verification = Date(2010, 1, 1) + 120;
  const EmosModel cold = fit_emos(archive, m, verification, 50);
  EmosFitOptions options;
  options.warm_start = cold;
  const EmosModel warm = fit_emos(archive, m, verification, 50, options);
  CHECK(warm.a == doctest::Approx(cold.a).epsilon(1e-3));
  CHECK(warm.b == doctest::Approx(cold.b).epsilon(1e-3));
}

TEST_CASE("fitted models beat the raw ensemble CRPS in-sample") {
  // Biased, underdispersed synthetic ensemble; compare the fit's mean
  // training CRPS against the raw ensemble's empirical CRPS per window.
  ScenarioConfig config;
  config.stations = {"vienna", "bratislava"};
  config.distances_km = {{"vienna", "bratislava", 50.0}};
  config.n_days = 160;
  config.ensemble.members = 20;
  config.ensemble.bias_c = 1.0;
  config.ensemble.spread_factor = 0.5;
  config.seed = 12;
  const Archive archive = generate_scenario(config);
  const auto m = margin("vienna");

  int improved = 0;
  int windows = 0;
  for (int offset = 55; offset < 55 + 30; ++offset) {
    const Date verification = config.start_date + offset;
    const EmosModel model = fit_emos(archive, m, verification, 50);
    double fit_crps = 0.0;
    double raw_crps = 0.0;
    for (Date d : model.training_window) {
      const ForecastCase& fc = *archive.find_forecast(d);
      const double y = *archive.find_observation(d)->find(m);
      fit_crps += gaussian_crps(predictive_law(model, fc), y);
      raw_crps += crps_ensemble(fc.members.at(m), y);
    }
    improved += fit_crps <= raw_crps;
    ++windows;
  }
  CHECK(improved >= windows * 9 / 10);
}

}  // TEST_SUITE
