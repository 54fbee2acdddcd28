#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <map>
#include <vector>

#include "emcopp/copula.hpp"
#include "emcopp/error.hpp"
#include "emcopp/rng.hpp"
#include "emcopp/stats.hpp"
#include "emcopp/verify.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace emcopp;
using test_support::margin;

namespace {

EnsembleMatrix matrix_of(const std::vector<std::vector<double>>& members) {
  EnsembleMatrix m;
  m.members = members;
  const std::size_t dim = members.front().size();
  const char* names[] = {"s1", "s2", "s3", "s4", "s5"};
  for (std::size_t l = 0; l < dim; ++l) m.margins.push_back(margin(names[l]));
  return m;
}

std::vector<std::vector<double>> random_members(Rng& rng, std::size_t n,
                                                std::size_t dim,
                                                double scale = 4.0) {
  std::vector<std::vector<double>> members(n, std::vector<double>(dim));
  for (auto& row : members) {
    for (double& v : row) v = scale * rng.next_gaussian();
  }
  return members;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("crps_ensemble point forecast and worked example") {
  CHECK(crps_ensemble(std::vector<double>{1.0}, 1.0) == 0.0);
  CHECK(crps_ensemble(std::vector<double>{0.0, 2.0}, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(crps_ensemble(std::vector<double>{}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("crps_ensemble equals the energy score in one dimension") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.next_below(20);
    std::vector<std::vector<double>> members(n, std::vector<double>(1));
    std::vector<double> flat(n);
    for (std::size_t i = 0; i < n; ++i) {
      flat[i] = 3.0 * rng.next_gaussian();
      members[i][0] = flat[i];
    }
    const double y = rng.next_gaussian();
    const double es = energy_score(matrix_of(members), std::vector<double>{y});
    REQUIRE(std::fabs(crps_ensemble(flat, y) - es) < 1e-12);
  }
}

TEST_CASE("crps_ensemble matches brute-force recomputation") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_below(40);
    std::vector<double> members(n);
    for (double& v : members) v = 10.0 * rng.next_gaussian();
    const double y = 10.0 * rng.next_gaussian();
    REQUIRE(std::fabs(crps_ensemble(members, y) -
                      oracle::crps_ensemble_brute(members, y)) < 1e-10);
  }
}

TEST_CASE("energy_score single-member cases") {
  CHECK(energy_score(matrix_of({{1.0, 2.0}}), std::vector<double>{1.0, 2.0}) ==
        0.0);
  // One member: the pair term vanishes, leaving the Euclidean distance.
  CHECK(energy_score(matrix_of({{3.0, 6.0}}), std::vector<double>{0.0, 2.0}) ==
        doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("energy_score worked example and dimension check") {
  CHECK(energy_score(matrix_of({{0.0}, {2.0}}), std::vector<double>{1.0}) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(
      energy_score(matrix_of({{0.0, 1.0}}), std::vector<double>{1.0}),
      std::invalid_argument);
}

TEST_CASE("energy_score matches brute-force recomputation") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_below(25);
    const std::size_t dim = 1 + rng.next_below(4);
    const auto members = random_members(rng, n, dim);
    std::vector<double> y(dim);
    for (double& v : y) v = 4.0 * rng.next_gaussian();
    const double lib = energy_score(matrix_of(members), y);
    REQUIRE(lib >= 0.0);
    REQUIRE(std::fabs(lib - oracle::energy_score_brute(members, y)) < 1e-10);
  }
}

TEST_CASE("vs_weights with equal distances is uniform") {
  StationGeometry geom;
  geom.set_distance("a", "b", 100.0);
  geom.set_distance("b", "c", 100.0);
  geom.set_distance("a", "c", 100.0);
  const auto w = vs_weights(geom, {margin("a"), margin("b"), margin("c")});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(w[i][j] == doctest::Approx(i == j ? 0.0 : 1.0 / 6.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("vs_weights on the Vienna-Bratislava-Budapest geometry") {
  StationGeometry geom;
  geom.set_distance("vienna", "bratislava", 50.0);
  geom.set_distance("bratislava", "budapest", 170.0);
  geom.set_distance("vienna", "budapest", 210.0);
  const std::vector<MarginId> margins{margin("bratislava"), margin("budapest"),
                                      margin("vienna")};
  const auto w = vs_weights(geom, margins);
  double off_diag_sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) off_diag_sum += w[i][j];
  }
  CHECK(std::fabs(off_diag_sum - 1.0) < 1e-12);
  // margins sorted here as bratislava, budapest, vienna.
  CHECK(std::fabs(w[0][2] - 0.326319) < 1e-5);
  CHECK(std::fabs(w[2][0] - 0.326319) < 1e-5);
  CHECK(w[0][2] == w[2][0]);
}

TEST_CASE("vs_weights with two margins is half each way") {
  StationGeometry geom;
  geom.set_distance("a", "b", 437.0);
  const auto w = vs_weights(geom, {margin("a"), margin("b")});
  CHECK(w[0][1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[1][0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("vs_weights rejects nonpositive distances") {
  StationGeometry geom;
  CHECK_THROWS_AS(geom.set_distance("a", "b", 0.0), std::invalid_argument);
  CHECK_THROWS_AS(geom.set_distance("a", "b", -3.0), std::invalid_argument);
  geom.set_distance("a", "b", 10.0);
  // Two margins at the same station: zero implied distance.
  CHECK_THROWS_AS(vs_weights(geom, {margin("a", "t2m"), margin("a", "wind")}),
                  std::invalid_argument);
}

TEST_CASE("variogram_score exact cases") {
  const std::vector<std::vector<double>> w{{0.0, 0.5}, {0.5, 0.0}};
  CHECK(variogram_score(matrix_of({{0.0, 1.0}}), std::vector<double>{0.0, 1.0},
                        w) == 0.0);
  CHECK(variogram_score(matrix_of({{0.0, 0.0}}), std::vector<double>{0.0, 1.0},
                        w) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("variogram_score is shift invariant") {
  Rng rng(11);
  const auto members = random_members(rng, 12, 3);
  std::vector<double> y{1.0, -2.0, 0.5};
  StationGeometry geom;
  geom.set_distance("s1", "s2", 50.0);
  geom.set_distance("s2", "s3", 170.0);
  geom.set_distance("s1", "s3", 210.0);
  const auto w = vs_weights(geom, matrix_of(members).margins);
  const double base = variogram_score(matrix_of(members), y, w);
  auto shifted = members;
  for (auto& row : shifted) {
    for (double& v : row) v += 123.25;
  }
  std::vector<double> y_shifted = y;
  for (double& v : y_shifted) v += 123.25;
  CHECK(variogram_score(matrix_of(shifted), y_shifted, w) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("variogram_score matches brute-force recomputation") {
  Rng rng(12);
  StationGeometry geom;
  geom.set_distance("s1", "s2", 50.0);
  geom.set_distance("s2", "s3", 170.0);
  geom.set_distance("s1", "s3", 210.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_below(25);
    const auto members = random_members(rng, n, 3);
    std::vector<double> y(3);
    for (double& v : y) v = 4.0 * rng.next_gaussian();
    const auto w = vs_weights(geom, matrix_of(members).margins);
    const double lib = variogram_score(matrix_of(members), y, w);
    REQUIRE(lib >= 0.0);
    REQUIRE(std::fabs(lib - oracle::variogram_score_brute(members, y, w)) <
            1e-10);
  }
}

TEST_CASE("multivariate_rank dominated observation gets rank one") {
  const auto ensemble = matrix_of({{1.0, 1.0}, {2.0, 3.0}, {4.0, 2.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(multivariate_rank(ensemble, std::vector<double>{0.0, 0.5}, seed) == 1);
  }
}

TEST_CASE("multivariate_rank worked example") {
  // Pre-ranks: y = (1,1) covers itself and (0,0) -> 2; members get 1 and 3.
  const auto ensemble = matrix_of({{0.0, 0.0}, {2.0, 2.0}});
  CHECK(multivariate_rank(ensemble, std::vector<double>{1.0, 1.0}, 5) == 2);
}

TEST_CASE("band_depth_rank puts the deepest vector last") {
  const auto ensemble = matrix_of({{0.0}, {2.0}});
  CHECK(band_depth_rank(ensemble, std::vector<double>{1.0}, 3) == 3);
}

TEST_CASE("band_depth_rank outlying observation is minimal") {
  // No member is extreme in both coordinates, so only y has zero depth.
  const auto ensemble =
      matrix_of({{1.0, 4.0}, {2.0, 3.0}, {3.0, 2.0}, {4.0, 1.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(band_depth_rank(ensemble, std::vector<double>{-100.0, -100.0},
                          seed) == 1);
  }
}

TEST_CASE("average_rank worked example and maximal observation") {
  const auto ensemble = matrix_of({{0.0, 0.0}, {2.0, 2.0}});
  CHECK(average_rank(ensemble, std::vector<double>{1.0, 1.0}, 5) == 2);
  CHECK(average_rank(ensemble, std::vector<double>{9.0, 9.0}, 5) == 3);
}

TEST_CASE("rank statistics are uniform for exchangeable pools") {
  const std::size_t n = 10, dim = 2;
  const int draws = 20000;
  std::vector<std::uint64_t> counts_mv(n + 1, 0), counts_bd(n + 1, 0),
      counts_avg(n + 1, 0);
  Rng rng(20250101);
  for (int i = 0; i < draws; ++i) {
    const auto members = random_members(rng, n, dim, 1.0);
    std::vector<double> y(dim);
    for (double& v : y) v = rng.next_gaussian();
    const auto m = matrix_of(members);
    ++counts_mv[multivariate_rank(m, y, rng.next_u64()) - 1];
    ++counts_bd[band_depth_rank(m, y, rng.next_u64()) - 1];
    ++counts_avg[average_rank(m, y, rng.next_u64()) - 1];
  }
  CHECK(chi_squared_uniform(counts_mv).p_value > 1e-3);
  CHECK(chi_squared_uniform(counts_bd).p_value > 1e-3);
  CHECK(chi_squared_uniform(counts_avg).p_value > 1e-3);
}

TEST_CASE("rank statistics are invariant under monotone transforms") {
  Rng rng(77);
  const auto transform = [](double v) { return std::exp(0.5 * v) + v * v * v; };
  for (int trial = 0; trial < 50; ++trial) {
    const auto members = random_members(rng, 8, 3, 1.0);
    std::vector<double> y(3);
    for (double& v : y) v = rng.next_gaussian();
    auto members_t = members;
    for (auto& row : members_t) {
      for (double& v : row) v = transform(v);
    }
    std::vector<double> y_t = y;
    for (double& v : y_t) v = transform(v);
    const std::uint64_t seed = rng.next_u64();
    REQUIRE(multivariate_rank(matrix_of(members), y, seed) ==
            multivariate_rank(matrix_of(members_t), y_t, seed));
    REQUIRE(band_depth_rank(matrix_of(members), y, seed) ==
            band_depth_rank(matrix_of(members_t), y_t, seed));
    REQUIRE(average_rank(matrix_of(members), y, seed) ==
            average_rank(matrix_of(members_t), y_t, seed));
  }
}

TEST_CASE("reordering changes ES/VS but never the per-margin CRPS") {
  Rng rng(313);
  const std::vector<MarginId> ids{margin("s1"), margin("s2"), margin("s3")};
  StationGeometry geom;
  geom.set_distance("s1", "s2", 50.0);
  geom.set_distance("s2", "s3", 170.0);
  geom.set_distance("s1", "s3", 210.0);

  std::map<MarginId, std::vector<double>> samples;
  const std::size_t n = 20;
  for (const MarginId& id : ids) {
    std::vector<double> s(n);
    for (double& v : s) v = rng.next_gaussian();
    std::sort(s.begin(), s.end());
    samples.emplace(id, s);
  }
  std::map<MarginId, std::vector<double>> dependence;
  for (const MarginId& id : ids) {
    std::vector<double> z(n);
    for (double& v : z) v = rng.next_gaussian();
    dependence.emplace(id, z);
  }
  const auto shuffled =
      reorder(samples, derive_template(dependence, rng.next_u64()));

  std::vector<double> y(3);
  for (double& v : y) v = rng.next_gaussian();
  const auto w = vs_weights(geom, ids);

  const auto base_matrix = to_matrix(samples);
  const auto shuffled_matrix = to_matrix(shuffled.members);
  CHECK(energy_score(base_matrix, y) != energy_score(shuffled_matrix, y));
  CHECK(variogram_score(base_matrix, y, w) !=
        variogram_score(shuffled_matrix, y, w));
  for (std::size_t l = 0; l < ids.size(); ++l) {
    REQUIRE(std::fabs(crps_ensemble(samples.at(ids[l]), y[l]) -
                      crps_ensemble(shuffled.members.at(ids[l]), y[l])) <
            1e-12);
  }
}

TEST_CASE("aggregate of a single case reproduces its scores") {
  CaseScores c;
  c.es = 1.5;
  c.vs = 0.25;
  c.crps[margin("s1")] = 0.75;
  c.multivariate_rank = 3;
  c.band_depth_rank = 1;
  c.average_rank = 5;
  const VerificationReport report =
      aggregate("demo", std::vector<CaseScores>{c}, 4);
  CHECK(report.mean_es == 1.5);
  CHECK(report.mean_vs == 0.25);
  CHECK(report.mean_crps.at(margin("s1")) == 0.75);
  CHECK(report.multivariate.counts == std::vector<std::uint64_t>{0, 0, 1, 0, 0});
  CHECK(report.band_depth.counts == std::vector<std::uint64_t>{1, 0, 0, 0, 0});
  CHECK(report.average.counts == std::vector<std::uint64_t>{0, 0, 0, 0, 1});
}

TEST_CASE("aggregate over a duplicated case set doubles counts, keeps means") {
  Rng rng(4);
  std::vector<CaseScores> cases;
  for (int i = 0; i < 7; ++i) {
    CaseScores c;
    c.es = rng.next_double();
    c.vs = rng.next_double();
    c.crps[margin("s1")] = rng.next_double();
    c.multivariate_rank = 1 + static_cast<int>(rng.next_below(5));
    c.band_depth_rank = 1 + static_cast<int>(rng.next_below(5));
    c.average_rank = 1 + static_cast<int>(rng.next_below(5));
    cases.push_back(c);
  }
  auto doubled = cases;
  doubled.insert(doubled.end(), cases.begin(), cases.end());
  const auto once = aggregate("demo", cases, 4);
  const auto twice = aggregate("demo", doubled, 4);
  CHECK(twice.mean_es == doctest::Approx(once.mean_es).epsilon(1e-15));
  CHECK(twice.mean_vs == doctest::Approx(once.mean_vs).epsilon(1e-15));
  for (std::size_t b = 0; b < once.multivariate.counts.size(); ++b) {
    CHECK(twice.multivariate.counts[b] == 2 * once.multivariate.counts[b]);
  }

  // Mean equals the brute-force average.
  double es_sum = 0.0;
  for (const CaseScores& c : cases) es_sum += c.es;
  CHECK(once.mean_es == doctest::Approx(es_sum / cases.size()).epsilon(1e-15));
}

TEST_CASE("aggregate rejects ranks outside the bin range") {
  CaseScores c;
  c.es = c.vs = 0.0;
  c.multivariate_rank = 6;  // ensemble size 4 allows ranks 1..5
  c.band_depth_rank = 1;
  c.average_rank = 1;
  CHECK_THROWS_AS(aggregate("demo", std::vector<CaseScores>{c}, 4),
                  std::invalid_argument);
}

TEST_CASE("rank histogram rebinned to deciles") {
  RankHistogram h;
  h.counts.assign(51, 1);  // N = 50
  h.cases = 51;
  const auto deciles = h.rebinned(10);
  REQUIRE(deciles.size() == 10);
  std::uint64_t total = 0;
  for (auto c : deciles) total += c;
  CHECK(total == 51);
  // ceil((b-1)*51/10)+1 .. ceil(b*51/10): first bin has 6 ranks, the rest 5.
  CHECK(deciles[0] == 6);
  for (std::size_t b = 1; b < 10; ++b) CHECK(deciles[b] == 5);
}

TEST_CASE("chi-squared tail against reference values") {
  CHECK(chi_squared_tail(5.991464547107979, 2) ==
        doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_squared_tail(67.50480655204354, 50) ==
        doctest::Approx(0.05).epsilon(1e-6));
  const std::vector<std::uint64_t> uniform(10, 100);
  const Chi2Result r = chi_squared_uniform(uniform);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.dof == 9);
}

}  // TEST_SUITE
