#include "emcopp/scenario.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "emcopp/error.hpp"
#include "emcopp/rng.hpp"

namespace emcopp {

void ScenarioConfig::validate() const {
  if (stations.empty()) throw ConfigError("scenario: no stations");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].empty()) throw ConfigError("scenario: empty station name");
    for (std::size_t j = i + 1; j < stations.size(); ++j) {
      if (stations[i] == stations[j]) {
        throw ConfigError("scenario: duplicate station " + stations[i]);
      }
    }
  }
  if (stations.size() > 1 && distances_km.empty() && coordinates_km.empty()) {
    throw ConfigError("scenario: need distances_km or coordinates_km");
  }
  if (n_days < 1) throw ConfigError("scenario: n_days must be positive");
  if (lead_hours < 24 || lead_hours % 24 != 0) {
    throw ConfigError("scenario: lead_hours must be a positive multiple of 24");
  }
  if (!(spatial_corr_range_km > 0.0)) {
    throw ConfigError("scenario: spatial_corr_range_km must be positive");
  }
  if (anomaly_sd_c < 0.0 || weather_sd_c < 0.0 || common_weather_sd_c < 0.0 ||
      obs_noise_sd_c < 0.0) {
    throw ConfigError("scenario: standard deviations must be nonnegative");
  }
  if (ensemble.members < 2) {
    throw ConfigError("scenario: ensemble.members must be >= 2");
  }
  if (!(ensemble.spread_factor > 0.0)) {
    throw ConfigError("scenario: spread_factor must be positive");
  }
}

StationGeometry ScenarioConfig::geometry() const {
  StationGeometry geom;
  if (!distances_km.empty()) {
    for (const auto& [a, b, km] : distances_km) geom.set_distance(a, b, km);
    return geom;
  }
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (std::size_t j = i + 1; j < stations.size(); ++j) {
      auto pa = coordinates_km.find(stations[i]);
      auto pb = coordinates_km.find(stations[j]);
      if (pa == coordinates_km.end() || pb == coordinates_km.end()) {
        throw ConfigError("scenario: missing coordinates for a station");
      }
      const double dx = pa->second.first - pb->second.first;
      const double dy = pa->second.second - pb->second.second;
      geom.set_distance(stations[i], stations[j], std::hypot(dx, dy));
    }
  }
  return geom;
}

namespace {

// Factor F with F F^T = C computed from the spectral decomposition, with a
// small eigenvalue floor since exp(-d/rho) matrices can be numerically
// semidefinite for near-duplicate sites.
Eigen::MatrixXd correlation_factor(const StationGeometry& geom,
                                   const std::vector<std::string>& stations,
                                   double range_km) {
  const auto s = static_cast<Eigen::Index>(stations.size());
  Eigen::MatrixXd corr(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      corr(i, j) =
          i == j ? 1.0
                 : std::exp(-geom.distance(stations[i], stations[j]) / range_km);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  for (Eigen::Index i = 0; i < s; ++i) {
    eigenvalues(i) = std::sqrt(std::max(eigenvalues(i), 1e-10));
  }
  return solver.eigenvectors() * eigenvalues.asDiagonal();
}

Eigen::VectorXd correlated_draw(const Eigen::MatrixXd& factor, Rng& rng) {
  Eigen::VectorXd z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.next_gaussian();
  return factor * z;
}

}  // namespace

Archive generate_scenario(const ScenarioConfig& config) {
  config.validate();
  const std::size_t n_stations = config.stations.size();
  const Eigen::MatrixXd factor =
      n_stations > 1 ? correlation_factor(config.geometry(), config.stations,
                                          config.spatial_corr_range_km)
                     : Eigen::MatrixXd::Ones(1, 1);

  std::vector<ScenarioConfig::Seasonal> seasonal(n_stations);
  for (std::size_t s = 0; s < n_stations; ++s) {
    auto it = config.seasonal.find(config.stations[s]);
    if (it != config.seasonal.end()) seasonal[s] = it->second;
  }

  std::vector<MarginId> margins(n_stations);
  for (std::size_t s = 0; s < n_stations; ++s) {
    margins[s] = {config.variable, config.stations[s], config.lead_hours};
  }
  const std::int64_t lead_days = config.lead_hours / 24;
  const double two_pi = 6.283185307179586476925286766559;

  Rng rng(derive_seed(config.seed, "scenario"));
  Archive archive;
  for (int day = 0; day < config.n_days; ++day) {
    const Date date = config.start_date + day;
    const double doy = static_cast<double>(date.day_of_year_365());

    const Eigen::VectorXd anomaly =
        config.anomaly_sd_c * correlated_draw(factor, rng);
    std::vector<double> truth(n_stations);
    for (std::size_t s = 0; s < n_stations; ++s) {
      truth[s] = seasonal[s].mean_c +
                 seasonal[s].amplitude_c *
                     std::sin(two_pi * (doy - seasonal[s].phase_days) / 365.0) +
                 anomaly(static_cast<Eigen::Index>(s));
    }

    // Observation: truth + unpredictable weather perturbation + noise.
    const Eigen::VectorXd obs_field =
        config.weather_sd_c * correlated_draw(factor, rng);
    const double obs_common = config.common_weather_sd_c * rng.next_gaussian();
    ObservationRecord obs;
    obs.date = date;
    for (std::size_t s = 0; s < n_stations; ++s) {
      obs.values[margins[s].reduced()] =
          truth[s] + obs_field(static_cast<Eigen::Index>(s)) + obs_common +
          config.obs_noise_sd_c * rng.next_gaussian();
    }
    archive.add_observation(std::move(obs));

    // Members: fresh draws of the same composite perturbation.
    ForecastCase fc;
    fc.verification_date = date;
    fc.init_date = date - lead_days;
    std::vector<std::vector<double>> member_values(
        n_stations, std::vector<double>(config.ensemble.members));
    for (int m = 0; m < config.ensemble.members; ++m) {
      const Eigen::VectorXd member_field =
          config.weather_sd_c * correlated_draw(factor, rng);
      const double member_common =
          config.common_weather_sd_c * rng.next_gaussian();
      for (std::size_t s = 0; s < n_stations; ++s) {
        const double perturbation =
            member_field(static_cast<Eigen::Index>(s)) + member_common +
            config.obs_noise_sd_c * rng.next_gaussian();
        member_values[s][m] =
            truth[s] + config.ensemble.bias_c +
            config.ensemble.spread_factor * perturbation;
      }
    }
    for (std::size_t s = 0; s < n_stations; ++s) {
      fc.members.emplace(margins[s], std::move(member_values[s]));
    }
    archive.add_forecast(std::move(fc));
  }
  return archive;
}

}  // namespace emcopp
