#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emcopp/archive.hpp"
#include "emcopp/verify.hpp"

namespace emcopp {

// Synthetic multi-station scenario with known ground truth.
//
// Daily truth per station = seasonal cycle + a spatially correlated anomaly
// field (correlation exp(-dist/rho)). The observation deviates from truth by
// an unpredictable weather perturbation (a correlated field plus an optional
// domain-wide mode) and independent measurement noise; ensemble members
// deviate by bias plus independent draws of that same composite
// perturbation, scaled by spread_factor. Members are exchangeable by
// construction, and with spread_factor = 1 and zero bias the observation is
// exchangeable with the members, i.e. the raw ensemble is calibrated.
// spread_factor < 1 yields an underdispersed ensemble.
struct ScenarioConfig {
  struct Seasonal {
    double mean_c = 10.0;
    double amplitude_c = 10.0;
    double phase_days = 105.0;  // day of year of the seasonal peak offset
  };
  struct Ensemble {
    int members = 50;  // M >= 2
    double bias_c = 0.0;
    double spread_factor = 1.0;  // > 0
  };

  std::vector<std::string> stations;
  // Either explicit pairwise distances or planar coordinates per station.
  std::vector<std::tuple<std::string, std::string, double>> distances_km;
  std::map<std::string, std::pair<double, double>> coordinates_km;

  Date start_date = Date(2002, 1, 1);
  int n_days = 365;
  std::string variable = "t2m";
  int lead_hours = 24;

  std::map<std::string, Seasonal> seasonal;
  double spatial_corr_range_km = 100.0;  // rho > 0
  double anomaly_sd_c = 2.0;             // predictable field, marginal sd
  double weather_sd_c = 2.0;             // unpredictable field, marginal sd
  double common_weather_sd_c = 0.0;      // domain-wide unpredictable mode
  double obs_noise_sd_c = 0.5;           // iid measurement noise
  Ensemble ensemble;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  StationGeometry geometry() const;
};

// Deterministic archive generation; days are drawn in date order from a
// single stream seeded by config.seed.
Archive generate_scenario(const ScenarioConfig& config);

}  // namespace emcopp
