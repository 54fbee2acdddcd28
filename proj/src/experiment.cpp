#include "emcopp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "emcopp/archive_io.hpp"
#include "emcopp/copula.hpp"
#include "emcopp/emos.hpp"
#include "emcopp/error.hpp"
#include "emcopp/parallel.hpp"
#include "emcopp/rng.hpp"
#include "emcopp/templates.hpp"

namespace emcopp {

using nlohmann::json;

const char* method_name(Method m) {
  switch (m) {
    case Method::Raw:
      return "raw";
    case Method::Individual:
      return "individual";
    case Method::Ecc:
      return "ecc";
    case Method::RandomSchaake:
      return "random_schaake";
    case Method::ClarkSchaake:
      return "clark_schaake";
    case Method::SimSchaake:
      return "simschaake";
  }
  return "raw";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::Raw, Method::Individual, Method::Ecc,
                   Method::RandomSchaake, Method::ClarkSchaake,
                   Method::SimSchaake}) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  const int sources = (scenario ? 1 : 0) + (forecasts_csv ? 1 : 0);
  if (sources != 1 || (forecasts_csv.has_value() != observations_csv.has_value())) {
    throw ConfigError(
        "config: need exactly one archive source (scenario, or forecasts_csv "
        "+ observations_csv)");
  }
  if (methods.empty()) throw ConfigError("config: no methods selected");
  std::set<Method> seen;
  for (Method m : methods) {
    if (!seen.insert(m).second) {
      throw ConfigError(std::string("config: duplicate method ") +
                        method_name(m));
    }
  }
  if (ensemble_size < 2) throw ConfigError("config: ensemble_size must be >= 2");
  if (training_days < 2) throw ConfigError("config: training_days must be >= 2");
  const bool has_range = test_start.has_value() || test_end.has_value();
  if (has_range && (!test_start || !test_end)) {
    throw ConfigError("config: test period range needs both start and end");
  }
  if (has_range == test_last_days.has_value()) {
    throw ConfigError(
        "config: specify the test period as either start/end or last_days");
  }
  if (has_range && *test_end < *test_start) {
    throw ConfigError("config: test period end precedes start");
  }
  if (test_last_days && *test_last_days == 0) {
    throw ConfigError("config: test_last_days must be positive");
  }
  if (n_randomized_runs < 1) {
    throw ConfigError("config: n_randomized_runs must be >= 1");
  }
  if (clark_window_days < 0 || clark_window_days > 182) {
    throw ConfigError("config: clark_window_days out of range");
  }
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

namespace {

// ----- JSON helpers ---------------------------------------------------

[[noreturn]] void config_fail(const std::string& what) {
  throw ConfigError("config: " + what);
}

const json& require_key(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(std::string("missing key '") + key + "'");
  return *it;
}

double as_number(const json& j, const char* key) {
  if (!j.is_number()) config_fail(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

std::string as_string(const json& j, const char* key) {
  if (!j.is_string()) config_fail(std::string("'") + key + "' must be a string");
  return j.get<std::string>();
}

Date as_date(const json& j, const char* key) {
  try {
    return Date::from_iso(as_string(j, key));
  } catch (const std::invalid_argument& e) {
    config_fail(std::string("'") + key + "': " + e.what());
  }
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) config_fail("scenario must be an object");
  ScenarioConfig cfg;
  for (const json& station : require_key(j, "stations")) {
    cfg.stations.push_back(as_string(station, "stations[]"));
  }
  if (j.contains("distances_km")) {
    for (const json& row : j["distances_km"]) {
      if (!row.is_array() || row.size() != 3) {
        config_fail("distances_km rows must be [station_a, station_b, km]");
      }
      cfg.distances_km.emplace_back(as_string(row[0], "distances_km"),
                                    as_string(row[1], "distances_km"),
                                    as_number(row[2], "distances_km"));
    }
  }
  if (j.contains("coordinates_km")) {
    for (const auto& [name, xy] : j["coordinates_km"].items()) {
      if (!xy.is_array() || xy.size() != 2) {
        config_fail("coordinates_km entries must be [x, y]");
      }
      cfg.coordinates_km[name] = {as_number(xy[0], "coordinates_km"),
                                  as_number(xy[1], "coordinates_km")};
    }
  }
  if (j.contains("start_date")) cfg.start_date = as_date(j["start_date"], "start_date");
  cfg.n_days = static_cast<int>(as_number(require_key(j, "n_days"), "n_days"));
  if (j.contains("variable")) cfg.variable = as_string(j["variable"], "variable");
  if (j.contains("lead_hours")) {
    cfg.lead_hours = static_cast<int>(as_number(j["lead_hours"], "lead_hours"));
  }
  ScenarioConfig::Seasonal default_seasonal;
  if (j.contains("seasonal_default")) {
    const json& s = j["seasonal_default"];
    if (s.contains("mean_c")) default_seasonal.mean_c = as_number(s["mean_c"], "mean_c");
    if (s.contains("amplitude_c")) {
      default_seasonal.amplitude_c = as_number(s["amplitude_c"], "amplitude_c");
    }
    if (s.contains("phase_days")) {
      default_seasonal.phase_days = as_number(s["phase_days"], "phase_days");
    }
  }
  for (const std::string& station : cfg.stations) {
    cfg.seasonal[station] = default_seasonal;
  }
  if (j.contains("seasonal")) {
    for (const auto& [station, s] : j["seasonal"].items()) {
      ScenarioConfig::Seasonal seasonal = default_seasonal;
      if (s.contains("mean_c")) seasonal.mean_c = as_number(s["mean_c"], "mean_c");
      if (s.contains("amplitude_c")) {
        seasonal.amplitude_c = as_number(s["amplitude_c"], "amplitude_c");
      }
      if (s.contains("phase_days")) {
        seasonal.phase_days = as_number(s["phase_days"], "phase_days");
      }
      cfg.seasonal[station] = seasonal;
    }
  }
  if (j.contains("spatial_corr_range_km")) {
    cfg.spatial_corr_range_km =
        as_number(j["spatial_corr_range_km"], "spatial_corr_range_km");
  }
  if (j.contains("anomaly_sd_c")) cfg.anomaly_sd_c = as_number(j["anomaly_sd_c"], "anomaly_sd_c");
  if (j.contains("weather_sd_c")) cfg.weather_sd_c = as_number(j["weather_sd_c"], "weather_sd_c");
  if (j.contains("common_weather_sd_c")) {
    cfg.common_weather_sd_c =
        as_number(j["common_weather_sd_c"], "common_weather_sd_c");
  }
  if (j.contains("obs_noise_sd_c")) {
    cfg.obs_noise_sd_c = as_number(j["obs_noise_sd_c"], "obs_noise_sd_c");
  }
  if (j.contains("ensemble")) {
    const json& e = j["ensemble"];
    if (e.contains("members")) {
      cfg.ensemble.members = static_cast<int>(as_number(e["members"], "members"));
    }
    if (e.contains("bias_c")) cfg.ensemble.bias_c = as_number(e["bias_c"], "bias_c");
    if (e.contains("spread_factor")) {
      cfg.ensemble.spread_factor = as_number(e["spread_factor"], "spread_factor");
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["stations"] = cfg.stations;
  if (!cfg.distances_km.empty()) {
    json rows = json::array();
    for (const auto& [a, b, km] : cfg.distances_km) {
      rows.push_back(json::array({a, b, km}));
    }
    j["distances_km"] = rows;
  }
  if (!cfg.coordinates_km.empty()) {
    json coords;
    for (const auto& [name, xy] : cfg.coordinates_km) {
      coords[name] = json::array({xy.first, xy.second});
    }
    j["coordinates_km"] = coords;
  }
  j["start_date"] = cfg.start_date.to_iso();
  j["n_days"] = cfg.n_days;
  j["variable"] = cfg.variable;
  j["lead_hours"] = cfg.lead_hours;
  json seasonal;
  for (const auto& [station, s] : cfg.seasonal) {
    seasonal[station] = {{"mean_c", s.mean_c},
                         {"amplitude_c", s.amplitude_c},
                         {"phase_days", s.phase_days}};
  }
  j["seasonal"] = seasonal;
  j["spatial_corr_range_km"] = cfg.spatial_corr_range_km;
  j["anomaly_sd_c"] = cfg.anomaly_sd_c;
  j["weather_sd_c"] = cfg.weather_sd_c;
  j["common_weather_sd_c"] = cfg.common_weather_sd_c;
  j["obs_noise_sd_c"] = cfg.obs_noise_sd_c;
  j["ensemble"] = {{"members", cfg.ensemble.members},
                   {"bias_c", cfg.ensemble.bias_c},
                   {"spread_factor", cfg.ensemble.spread_factor}};
  j["seed"] = cfg.seed;
  return j;
}

StationGeometry geometry_from_json(const json& j) {
  StationGeometry geom;
  for (const json& row : require_key(j, "distances_km")) {
    if (!row.is_array() || row.size() != 3) {
      config_fail("geometry.distances_km rows must be [station_a, station_b, km]");
    }
    geom.set_distance(as_string(row[0], "geometry"), as_string(row[1], "geometry"),
                      as_number(row[2], "geometry"));
  }
  return geom;
}

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) config_fail("experiment config must be an object");
  ExperimentConfig cfg;
  const json& archive = require_key(j, "archive");
  if (archive.contains("scenario")) {
    cfg.scenario = scenario_from_json(archive["scenario"]);
  }
  if (archive.contains("forecasts_csv")) {
    cfg.forecasts_csv = as_string(archive["forecasts_csv"], "forecasts_csv");
  }
  if (archive.contains("observations_csv")) {
    cfg.observations_csv =
        as_string(archive["observations_csv"], "observations_csv");
  }
  for (const json& m : require_key(j, "methods")) {
    cfg.methods.push_back(method_from_name(as_string(m, "methods[]")));
  }
  if (j.contains("ensemble_size")) {
    cfg.ensemble_size =
        static_cast<std::size_t>(as_number(j["ensemble_size"], "ensemble_size"));
  }
  if (j.contains("training_days")) {
    cfg.training_days =
        static_cast<std::size_t>(as_number(j["training_days"], "training_days"));
  }
  const json& period = require_key(j, "test_period");
  if (period.contains("start")) cfg.test_start = as_date(period["start"], "start");
  if (period.contains("end")) cfg.test_end = as_date(period["end"], "end");
  if (period.contains("last_days")) {
    cfg.test_last_days =
        static_cast<std::size_t>(as_number(period["last_days"], "last_days"));
  }
  if (j.contains("n_randomized_runs")) {
    cfg.n_randomized_runs =
        static_cast<int>(as_number(j["n_randomized_runs"], "n_randomized_runs"));
  }
  if (j.contains("clark_window_days")) {
    cfg.clark_window_days =
        static_cast<int>(as_number(j["clark_window_days"], "clark_window_days"));
  }
  if (j.contains("geometry")) cfg.geometry = geometry_from_json(j["geometry"]);
  if (j.contains("standardize_similarity")) {
    cfg.standardize_similarity = j["standardize_similarity"].get<bool>();
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) {
    cfg.threads = static_cast<int>(as_number(j["threads"], "threads"));
  }
  cfg.validate();
  return cfg;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

// ----- Experiment core ------------------------------------------------

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct DayOutcome {
  bool feasible = false;
  std::string skip_reason;
  std::map<Method, CaseScores> scores;
};

struct DayContext {
  const ExperimentConfig& config;
  const Archive& archive;
  const std::vector<MarginId>& margins;
  const std::vector<std::vector<double>>& weights;
  std::size_t raw_members;  // M of the first test forecast
};

CaseScores score_ensemble(const std::map<MarginId, std::vector<double>>& members,
                          const std::vector<double>& y,
                          const std::vector<std::vector<double>>& weights,
                          std::uint64_t rank_seed_base) {
  const EnsembleMatrix matrix = to_matrix(members);
  CaseScores scores;
  scores.es = energy_score(matrix, y);
  scores.vs = variogram_score(matrix, y, weights);
  std::size_t l = 0;
  for (const auto& [id, values] : members) {
    scores.crps[id] = crps_ensemble(values, y[l]);
    ++l;
  }
  scores.multivariate_rank =
      multivariate_rank(matrix, y, derive_seed(rank_seed_base, "rank_multivariate"));
  scores.band_depth_rank =
      band_depth_rank(matrix, y, derive_seed(rank_seed_base, "rank_band_depth"));
  scores.average_rank =
      average_rank(matrix, y, derive_seed(rank_seed_base, "rank_average"));
  return scores;
}

// ES/VS averaged over randomized runs; CRPS and rank statistics come from
// the first run.
CaseScores score_randomized(
    const std::function<std::map<MarginId, std::vector<double>>(int run)>& build,
    int n_runs, const std::vector<double>& y,
    const std::vector<std::vector<double>>& weights,
    std::uint64_t rank_seed_base) {
  CaseScores total;
  for (int run = 0; run < n_runs; ++run) {
    const auto members = build(run);
    if (run == 0) {
      total = score_ensemble(members, y, weights, rank_seed_base);
    } else {
      const EnsembleMatrix matrix = to_matrix(members);
      total.es += energy_score(matrix, y);
      total.vs += variogram_score(matrix, y, weights);
    }
  }
  total.es /= static_cast<double>(n_runs);
  total.vs /= static_cast<double>(n_runs);
  return total;
}

DayOutcome score_day(const DayContext& ctx, Date date) {
  const ExperimentConfig& config = ctx.config;
  DayOutcome outcome;
  const ForecastCase* fc = ctx.archive.find_forecast(date);
  const ObservationRecord* obs = ctx.archive.find_observation(date);
  if (fc == nullptr || obs == nullptr) {
    outcome.skip_reason = "missing forecast or observation";
    return outcome;
  }
  for (const MarginId& margin : ctx.margins) {
    if (fc->members.find(margin) == fc->members.end()) {
      outcome.skip_reason = "forecast lacks margin " + margin.to_string();
      return outcome;
    }
    if (obs->find(margin) == nullptr) {
      outcome.skip_reason = "observation lacks margin " + margin.to_string();
      return outcome;
    }
  }

  const std::size_t n = config.ensemble_size;
  const bool needs_emos =
      std::any_of(config.methods.begin(), config.methods.end(),
                  [](Method m) { return m != Method::Raw; });
  const bool uses_raw_members =
      std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
        return m == Method::Raw || m == Method::Ecc;
      });
  if (uses_raw_members && fc->member_count() != ctx.raw_members) {
    outcome.skip_reason = "raw member count differs across test days";
    return outcome;
  }

  std::vector<double> y(ctx.margins.size());
  for (std::size_t l = 0; l < ctx.margins.size(); ++l) {
    y[l] = *obs->find(ctx.margins[l]);
  }

  const std::uint64_t case_seed =
      derive_seed(config.seed, "case",
                  static_cast<std::uint64_t>(date.days_since_epoch()));

  try {
    // Shared EMOS marginals: one fit per margin, one quantile sample reused
    // by every postprocessing method.
    std::map<MarginId, std::vector<double>> samples;
    if (needs_emos) {
      for (const MarginId& margin : ctx.margins) {
        const EmosModel model =
            fit_emos(ctx.archive, margin, date, config.training_days);
        const PredictiveLaw law = predictive_law(model, *fc);
        samples.emplace(margin, sample_equidistant(law, n));
      }
    }

    for (Method method : config.methods) {
      const std::uint64_t method_seed =
          derive_seed(case_seed, method_name(method));
      switch (method) {
        case Method::Raw: {
          outcome.scores[method] = score_ensemble(
              fc->members, y, ctx.weights, derive_seed(method_seed, "score"));
          break;
        }
        case Method::Individual: {
          const auto build = [&](int run) {
            std::map<MarginId, std::vector<double>> members;
            std::uint64_t margin_ordinal = 0;
            for (const auto& [id, quantiles] : samples) {
              std::vector<int> perm(n);
              for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
              Rng rng(derive_seed(
                  derive_seed(method_seed, "pairing",
                              static_cast<std::uint64_t>(run)),
                  margin_ordinal++));
              rng.shuffle(perm.begin(), perm.end());
              std::vector<double> values(n);
              for (std::size_t i = 0; i < n; ++i) {
                values[i] = quantiles[static_cast<std::size_t>(perm[i])];
              }
              members.emplace(id, std::move(values));
            }
            return members;
          };
          outcome.scores[method] =
              score_randomized(build, config.n_randomized_runs, y, ctx.weights,
                               derive_seed(method_seed, "score"));
          break;
        }
        case Method::Ecc: {
          const RankTemplate tmpl =
              ecc_template(*fc, derive_seed(method_seed, "template"));
          outcome.scores[method] = score_ensemble(
              reorder(samples, tmpl, method_name(method)).members, y,
              ctx.weights, derive_seed(method_seed, "score"));
          break;
        }
        case Method::RandomSchaake: {
          const auto build = [&](int run) {
            const auto run_salt = static_cast<std::uint64_t>(run);
            const std::vector<Date> dates = random_schaake_dates(
                ctx.archive, fc->init_date, n,
                derive_seed(method_seed, "dates", run_salt));
            const RankTemplate tmpl = observation_template(
                ctx.archive, dates, ctx.margins,
                derive_seed(method_seed, "template", run_salt),
                RankTemplate::Source::RandomSchaake);
            return reorder(samples, tmpl, method_name(method)).members;
          };
          outcome.scores[method] =
              score_randomized(build, config.n_randomized_runs, y, ctx.weights,
                               derive_seed(method_seed, "score"));
          break;
        }
        case Method::ClarkSchaake: {
          std::vector<Date> pool =
              clark_window_dates(ctx.archive, date, config.clark_window_days);
          if (pool.size() < n) {
            throw DataError("clark window has " + std::to_string(pool.size()) +
                            " candidate dates, need " + std::to_string(n));
          }
          Rng rng(derive_seed(method_seed, "dates"));
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
            std::swap(pool[i], pool[j]);
          }
          pool.resize(n);
          const RankTemplate tmpl = observation_template(
              ctx.archive, pool, ctx.margins,
              derive_seed(method_seed, "template"),
              RankTemplate::Source::ClarkSchaake);
          outcome.scores[method] = score_ensemble(
              reorder(samples, tmpl, method_name(method)).members, y,
              ctx.weights, derive_seed(method_seed, "score"));
          break;
        }
        case Method::SimSchaake: {
          std::optional<MarginStandardizer> standardizer;
          if (config.standardize_similarity) {
            standardizer = fit_margin_standardizer(ctx.archive, fc->init_date);
          }
          const std::vector<SimilarityScore> selected = simschaake_dates(
              ctx.archive, *fc, n, config.training_days,
              standardizer ? &*standardizer : nullptr);
          std::vector<Date> dates;
          dates.reserve(selected.size());
          for (const SimilarityScore& s : selected) {
            dates.push_back(s.candidate_date);
          }
          const RankTemplate tmpl = observation_template(
              ctx.archive, dates, ctx.margins,
              derive_seed(method_seed, "template"),
              RankTemplate::Source::SimSchaake);
          outcome.scores[method] = score_ensemble(
              reorder(samples, tmpl, method_name(method)).members, y,
              ctx.weights, derive_seed(method_seed, "score"));
          break;
        }
      }
    }
  } catch (const DataError& e) {
    outcome.scores.clear();
    outcome.skip_reason = e.what();
    return outcome;
  }
  outcome.feasible = true;
  return outcome;
}

std::vector<BootstrapInterval> paired_bootstrap(
    const std::map<Method, std::vector<CaseScores>>& per_day,
    std::uint64_t seed, int resamples = 1000) {
  std::vector<BootstrapInterval> intervals;
  if (per_day.empty()) return intervals;
  const std::size_t n_days = per_day.begin()->second.size();
  if (n_days == 0) return intervals;

  std::vector<Method> methods;
  for (const auto& [m, scores] : per_day) methods.push_back(m);

  // Common resample index sets keep the comparisons paired across methods.
  Rng rng(derive_seed(seed, "bootstrap"));
  std::vector<std::vector<std::uint32_t>> draws(
      static_cast<std::size_t>(resamples));
  for (auto& idx : draws) {
    idx.resize(n_days);
    for (auto& v : idx) {
      v = static_cast<std::uint32_t>(rng.next_below(n_days));
    }
  }

  for (std::size_t a = 0; a < methods.size(); ++a) {
    for (std::size_t b = a + 1; b < methods.size(); ++b) {
      const std::vector<CaseScores>& sa = per_day.at(methods[a]);
      const std::vector<CaseScores>& sb = per_day.at(methods[b]);
      for (const bool use_es : {true, false}) {
        std::vector<double> day_diffs(n_days);
        for (std::size_t d = 0; d < n_days; ++d) {
          day_diffs[d] = use_es ? sa[d].es - sb[d].es : sa[d].vs - sb[d].vs;
        }
        std::vector<double> resampled(draws.size());
        for (std::size_t r = 0; r < draws.size(); ++r) {
          double sum = 0.0;
          for (std::uint32_t idx : draws[r]) sum += day_diffs[idx];
          resampled[r] = sum / static_cast<double>(n_days);
        }
        std::sort(resampled.begin(), resampled.end());
        BootstrapInterval interval;
        interval.score = use_es ? "es" : "vs";
        interval.method_a = methods[a];
        interval.method_b = methods[b];
        interval.mean_diff = mean(day_diffs);
        interval.lo95 = resampled[static_cast<std::size_t>(
            std::floor(0.025 * (resampled.size() - 1)))];
        interval.hi95 = resampled[static_cast<std::size_t>(
            std::ceil(0.975 * (resampled.size() - 1)))];
        intervals.push_back(interval);
      }
    }
  }
  return intervals;
}

void write_outputs(const std::filesystem::path& out_dir,
                   const ExperimentConfig& config, const Archive& archive,
                   const ExperimentResult& result) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream out(out_dir / "scores.csv", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (out_dir / "scores.csv").string());
    std::vector<MarginId> margins = archive.margins();
    out << "method,cases,es,vs";
    for (const MarginId& m : margins) out << ",crps[" << m.to_string() << "]";
    out << '\n';
    for (const auto& [method, report] : result.reports) {
      out << method_name(method) << ',' << report.cases << ','
          << format_score(report.mean_es) << ',' << format_score(report.mean_vs);
      for (const MarginId& m : margins) {
        auto it = report.mean_crps.find(m);
        out << ',' << (it == report.mean_crps.end() ? "" : format_score(it->second));
      }
      out << '\n';
    }
  }

  for (const auto& [method, report] : result.reports) {
    for (const RankHistogram* hist :
         {&report.multivariate, &report.band_depth, &report.average}) {
      const std::string kind = rank_kind_name(hist->kind);
      {
        std::ofstream out(out_dir / ("ranks_" + kind + "_" +
                                     method_name(method) + ".csv"),
                          std::ios::trunc);
        out << "bin,count\n";
        for (std::size_t b = 0; b < hist->counts.size(); ++b) {
          out << b + 1 << ',' << hist->counts[b] << '\n';
        }
      }
      {
        std::ofstream out(out_dir / ("ranks10_" + kind + "_" +
                                     method_name(method) + ".csv"),
                          std::ios::trunc);
        out << "bin,count\n";
        const std::vector<std::uint64_t> rebinned = hist->rebinned(10);
        for (std::size_t b = 0; b < rebinned.size(); ++b) {
          out << b + 1 << ',' << rebinned[b] << '\n';
        }
      }
    }
  }

  {
    std::ofstream out(out_dir / "bootstrap.csv", std::ios::trunc);
    out << "score,method_a,method_b,mean_diff,ci95_lo,ci95_hi\n";
    for (const BootstrapInterval& b : result.bootstrap) {
      out << b.score << ',' << method_name(b.method_a) << ','
          << method_name(b.method_b) << ',' << format_score(b.mean_diff) << ','
          << format_score(b.lo95) << ',' << format_score(b.hi95) << '\n';
    }
  }

  {
    json manifest;
    manifest["tool"] = "emcopp";
    manifest["version"] = "1.0.0";
    json cfg;
    if (config.scenario) cfg["archive"]["scenario"] = scenario_to_json(*config.scenario);
    if (config.forecasts_csv) {
      cfg["archive"]["forecasts_csv"] = config.forecasts_csv->string();
      cfg["archive"]["observations_csv"] = config.observations_csv->string();
    }
    json methods = json::array();
    for (Method m : config.methods) methods.push_back(method_name(m));
    cfg["methods"] = methods;
    cfg["ensemble_size"] = config.ensemble_size;
    cfg["training_days"] = config.training_days;
    if (config.test_start) {
      cfg["test_period"] = {{"start", config.test_start->to_iso()},
                            {"end", config.test_end->to_iso()}};
    } else {
      cfg["test_period"] = {{"last_days", *config.test_last_days}};
    }
    cfg["n_randomized_runs"] = config.n_randomized_runs;
    cfg["clark_window_days"] = config.clark_window_days;
    cfg["standardize_similarity"] = config.standardize_similarity;
    cfg["seed"] = config.seed;
    manifest["config"] = cfg;
    manifest["seed_scheme"] =
        "case=derive(seed,'case',date); method=derive(case,name); "
        "run=derive(method,purpose,run_index); see README";
    json margins = json::array();
    for (const MarginId& m : archive.margins()) margins.push_back(m.to_string());
    manifest["archive"] = {
        {"margins", margins},
        {"forecast_dates", archive.forecasts().size()},
        {"observation_dates", archive.observations().size()},
    };
    manifest["scored_days"] = result.scored_dates.size();
    manifest["skipped_days"] = result.skipped_days;
    manifest["partial_archive_dates"] = result.partial_archive_dates;
    if (!result.scored_dates.empty()) {
      manifest["test_period_scored"] = {
          {"first", result.scored_dates.front().to_iso()},
          {"last", result.scored_dates.back().to_iso()}};
    }
    json chi2;
    for (const auto& [method, report] : result.reports) {
      json entry;
      for (const RankHistogram* hist :
           {&report.multivariate, &report.band_depth, &report.average}) {
        entry[rank_kind_name(hist->kind)] = {{"statistic", hist->chi2.statistic},
                                             {"dof", hist->chi2.dof},
                                             {"p_value", hist->chi2.p_value}};
      }
      chi2[method_name(method)] = entry;
    }
    manifest["rank_histogram_chi2"] = chi2;
    std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
    out << manifest.dump(2) << '\n';
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  return scenario_from_json(parse_json_text(json_text));
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_config(buffer.str());
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  return experiment_from_json(parse_json_text(json_text));
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

ExperimentResult run_experiment(
    const ExperimentConfig& config, const Archive& archive,
    const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  const std::vector<MarginId>& margins = archive.margins();
  if (margins.size() < 2) {
    throw ConfigError("experiment: need at least two margins");
  }

  StationGeometry geometry;
  if (config.geometry) {
    geometry = *config.geometry;
  } else if (config.scenario) {
    geometry = config.scenario->geometry();
  } else {
    throw ConfigError("experiment: geometry required for CSV archives");
  }
  const std::vector<std::vector<double>> weights = vs_weights(geometry, margins);

  // Candidate test days: paired forecast + complete observation.
  std::vector<Date> candidates;
  for (const auto& [date, fc] : archive.forecasts()) {
    if (config.test_start && (date < *config.test_start || date > *config.test_end)) {
      continue;
    }
    if (archive.observation_complete(date)) candidates.push_back(date);
  }
  if (config.test_last_days && candidates.size() > *config.test_last_days) {
    candidates.erase(candidates.begin(),
                     candidates.end() - static_cast<std::ptrdiff_t>(
                                            *config.test_last_days));
  }
  if (candidates.empty()) {
    throw DataError("experiment: no test days with forecast and observation");
  }

  const std::size_t raw_members =
      archive.find_forecast(candidates.front())->member_count();
  const bool has_ecc = std::count(config.methods.begin(), config.methods.end(),
                                  Method::Ecc) > 0;
  if (has_ecc && raw_members != config.ensemble_size) {
    throw ConfigError(
        "experiment: ecc requires ensemble_size N = raw member count M (N=" +
        std::to_string(config.ensemble_size) +
        ", M=" + std::to_string(raw_members) + ")");
  }

  DayContext ctx{config, archive, margins, weights, raw_members};
  std::vector<DayOutcome> outcomes(candidates.size());
  parallel_for(candidates.size(), config.threads,
               [&](std::size_t i) { outcomes[i] = score_day(ctx, candidates[i]); });

  ExperimentResult result;
  result.partial_archive_dates = archive.partial_dates().size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!outcomes[i].feasible) {
      ++result.skipped_days;
      result.skip_reasons.push_back(candidates[i].to_iso() + ": " +
                                    outcomes[i].skip_reason);
      continue;
    }
    result.scored_dates.push_back(candidates[i]);
    for (Method m : config.methods) {
      result.per_day[m].push_back(outcomes[i].scores.at(m));
    }
  }
  if (result.scored_dates.empty()) {
    throw DataError("experiment: every test day was infeasible (" +
                    std::to_string(result.skipped_days) + " skipped)");
  }

  for (Method m : config.methods) {
    const std::size_t n =
        m == Method::Raw ? raw_members : config.ensemble_size;
    result.reports.emplace(
        m, aggregate(method_name(m), result.per_day.at(m), n));
  }
  result.bootstrap = paired_bootstrap(result.per_day, config.seed);

  if (out_dir) write_outputs(*out_dir, config, archive, result);
  return result;
}

ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  Archive archive;
  if (config.scenario) {
    archive = generate_scenario(*config.scenario);
  } else {
    archive = load_archive(*config.forecasts_csv, *config.observations_csv);
  }
  return run_experiment(config, archive, out_dir);
}

}  // namespace emcopp
