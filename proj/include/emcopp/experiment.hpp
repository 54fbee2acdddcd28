#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emcopp/archive.hpp"
#include "emcopp/scenario.hpp"
#include "emcopp/verify.hpp"

namespace emcopp {

enum class Method {
  Raw,
  Individual,
  Ecc,
  RandomSchaake,
  ClarkSchaake,
  SimSchaake,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // throws ConfigError

// Config-driven experiment: per test day, fit EMOS per margin on a rolling
// window, draw N equidistant quantiles, build each method's dependence
// template, reorder, and score against the verifying observation.
struct ExperimentConfig {
  // Exactly one archive source.
  std::optional<ScenarioConfig> scenario;
  std::optional<std::filesystem::path> forecasts_csv;
  std::optional<std::filesystem::path> observations_csv;

  std::vector<Method> methods;
  std::size_t ensemble_size = 50;  // N
  std::size_t training_days = 50;  // rolling EMOS window length
  // Test period: either an explicit date range or the last K paired dates.
  std::optional<Date> test_start;
  std::optional<Date> test_end;
  std::optional<std::size_t> test_last_days;
  int n_randomized_runs = 100;  // Individual / Random Schaake averaging
  int clark_window_days = 7;
  std::optional<StationGeometry> geometry;  // defaults to scenario geometry
  bool standardize_similarity = false;      // for mixed-unit margin sets
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency; never affects results

  void validate() const;  // throws ConfigError
};

struct BootstrapInterval {
  std::string score;  // "es" | "vs"
  Method method_a;
  Method method_b;
  double mean_diff = 0.0;  // mean(score_a) - mean(score_b)
  double lo95 = 0.0;
  double hi95 = 0.0;
};

struct ExperimentResult {
  std::map<Method, VerificationReport> reports;
  std::vector<Date> scored_dates;
  std::size_t skipped_days = 0;
  std::vector<std::string> skip_reasons;  // one per skipped day
  std::size_t partial_archive_dates = 0;  // incomplete forecast/observation days
  std::vector<BootstrapInterval> bootstrap;
  // Per scored day and method, the (ES, VS) pair entering the means;
  // redundant with reports but needed for paired significance work.
  std::map<Method, std::vector<CaseScores>> per_day;
};

// Runs the experiment on a prebuilt archive. When out_dir is given, writes
// scores.csv, ranks_<kind>_<method>.csv, ranks10_<kind>_<method>.csv,
// bootstrap.csv and manifest.json.
ExperimentResult run_experiment(
    const ExperimentConfig& config, const Archive& archive,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Builds the archive from the config's source first.
ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// JSON config ingestion (see README for the schema).
ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace emcopp
