#include "emcopp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emcopp/copula.hpp"
#include "emcopp/error.hpp"
#include "emcopp/rng.hpp"

namespace emcopp {

void StationGeometry::set_distance(const std::string& a, const std::string& b,
                                   double km) {
  if (a == b) {
    throw std::invalid_argument("StationGeometry: self-distance for " + a);
  }
  if (!(km > 0.0)) {
    throw std::invalid_argument("StationGeometry: distance " + a + "-" + b +
                                " must be positive");
  }
  distances_[a < b ? std::make_pair(a, b) : std::make_pair(b, a)] = km;
}

double StationGeometry::distance(const std::string& a,
                                 const std::string& b) const {
  if (a == b) return 0.0;
  auto it =
      distances_.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  if (it == distances_.end()) {
    throw DataError("StationGeometry: no distance for pair " + a + "-" + b);
  }
  return it->second;
}

bool StationGeometry::has_distance(const std::string& a,
                                   const std::string& b) const {
  return distances_.count(a < b ? std::make_pair(a, b)
                                : std::make_pair(b, a)) > 0;
}

EnsembleMatrix to_matrix(
    const std::map<MarginId, std::vector<double>>& members) {
  EnsembleMatrix m;
  if (members.empty()) {
    throw std::invalid_argument("to_matrix: no margins");
  }
  const std::size_t n = members.begin()->second.size();
  m.margins.reserve(members.size());
  m.members.assign(n, std::vector<double>(members.size()));
  std::size_t l = 0;
  for (const auto& [id, values] : members) {
    if (values.size() != n) {
      throw std::invalid_argument("to_matrix: ragged member counts at " +
                                  id.to_string());
    }
    m.margins.push_back(id);
    for (std::size_t i = 0; i < n; ++i) m.members[i][l] = values[i];
    ++l;
  }
  return m;
}

double crps_ensemble(std::span<const double> members, double y) {
  const std::size_t n = members.size();
  if (n == 0) throw std::invalid_argument("crps_ensemble: empty ensemble");
  double obs_term = 0.0;
  for (double x : members) obs_term += std::fabs(x - y);
  double pair_term = 0.0;
  for (std::size_t nu = 0; nu < n; ++nu) {
    for (std::size_t m = 0; m < n; ++m) {
      pair_term += std::fabs(members[nu] - members[m]);
    }
  }
  const double nd = static_cast<double>(n);
  return obs_term / nd - pair_term / (2.0 * nd * nd);
}

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

void check_dimension(const EnsembleMatrix& ensemble,
                     std::span<const double> y, const char* op) {
  if (ensemble.n_members() == 0) {
    throw std::invalid_argument(std::string(op) + ": empty ensemble");
  }
  if (y.size() != ensemble.dimension()) {
    throw std::invalid_argument(std::string(op) +
                                ": observation dimension mismatch");
  }
  for (const auto& member : ensemble.members) {
    if (member.size() != ensemble.dimension()) {
      throw std::invalid_argument(std::string(op) +
                                  ": member dimension mismatch");
    }
  }
}

}  // namespace

double energy_score(const EnsembleMatrix& ensemble, std::span<const double> y) {
  check_dimension(ensemble, y, "energy_score");
  const std::size_t n = ensemble.n_members();
  double obs_term = 0.0;
  for (const auto& member : ensemble.members) obs_term += euclidean(member, y);
  double pair_term = 0.0;
  for (std::size_t nu = 0; nu < n; ++nu) {
    for (std::size_t m = nu + 1; m < n; ++m) {
      pair_term += euclidean(ensemble.members[nu], ensemble.members[m]);
    }
  }
  const double nd = static_cast<double>(n);
  // The nu == m diagonal vanishes; off-diagonal terms are symmetric.
  return obs_term / nd - pair_term / (nd * nd);
}

std::vector<std::vector<double>> vs_weights(
    const StationGeometry& geometry, const std::vector<MarginId>& margins) {
  const std::size_t l = margins.size();
  if (l < 2) {
    throw std::invalid_argument("vs_weights: need at least two margins");
  }
  std::vector<std::vector<double>> weights(l, std::vector<double>(l, 0.0));
  double total = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i == j) continue;
      const double dist =
          geometry.distance(margins[i].station, margins[j].station);
      if (!(dist > 0.0)) {
        throw std::invalid_argument(
            "vs_weights: nonpositive distance between " +
            margins[i].to_string() + " and " + margins[j].to_string());
      }
      weights[i][j] = 1.0 / dist;
      total += weights[i][j];
    }
  }
  for (auto& row : weights) {
    for (double& w : row) w /= total;
  }
  return weights;
}

double variogram_score(const EnsembleMatrix& ensemble,
                       std::span<const double> y,
                       const std::vector<std::vector<double>>& weights) {
  check_dimension(ensemble, y, "variogram_score");
  const std::size_t l = ensemble.dimension();
  if (weights.size() != l) {
    throw std::invalid_argument("variogram_score: weight matrix size mismatch");
  }
  const double n = static_cast<double>(ensemble.n_members());
  double score = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    if (weights[i].size() != l) {
      throw std::invalid_argument(
          "variogram_score: weight matrix size mismatch");
    }
    for (std::size_t j = 0; j < l; ++j) {
      const double w = weights[i][j];
      if (w < 0.0) {
        throw std::invalid_argument("variogram_score: negative weight");
      }
      if (i == j && w != 0.0) {
        throw std::invalid_argument("variogram_score: nonzero diagonal weight");
      }
      if (w == 0.0) continue;
      double member_variogram = 0.0;
      for (const auto& member : ensemble.members) {
        member_variogram += std::sqrt(std::fabs(member[i] - member[j]));
      }
      member_variogram /= n;
      const double gap =
          std::sqrt(std::fabs(y[i] - y[j])) - member_variogram;
      score += w * gap * gap;
    }
  }
  return score;
}

namespace {

// Randomized rank of the observation's pre-rank (index 0 in `pre_ranks`)
// within the whole pool of pre-ranks.
int randomized_rank_of_first(std::span<const double> pre_ranks, Rng& rng) {
  int below = 0;
  int tied = 0;
  const double target = pre_ranks[0];
  for (std::size_t i = 1; i < pre_ranks.size(); ++i) {
    if (pre_ranks[i] < target) ++below;
    if (pre_ranks[i] == target) ++tied;
  }
  const int offset =
      tied == 0
          ? 0
          : static_cast<int>(rng.next_below(static_cast<std::uint64_t>(tied) + 1));
  return below + 1 + offset;
}

// Pool as rows: row 0 is the observation, rows 1..N the members.
std::vector<std::vector<double>> build_pool(const EnsembleMatrix& ensemble,
                                            std::span<const double> y) {
  std::vector<std::vector<double>> pool;
  pool.reserve(ensemble.n_members() + 1);
  pool.emplace_back(y.begin(), y.end());
  for (const auto& member : ensemble.members) pool.push_back(member);
  return pool;
}

// 1-based pooled ranks per coordinate, pool-member-major result; ties
// resolved at random.
std::vector<std::vector<int>> coordinate_ranks(
    const std::vector<std::vector<double>>& pool, std::size_t dimension,
    Rng& rng) {
  const std::size_t pool_size = pool.size();
  std::vector<std::vector<int>> ranks(pool_size,
                                      std::vector<int>(dimension, 0));
  std::vector<double> column(pool_size);
  for (std::size_t l = 0; l < dimension; ++l) {
    for (std::size_t v = 0; v < pool_size; ++v) column[v] = pool[v][l];
    const std::vector<int> col_ranks = compute_ranks(column, rng);
    for (std::size_t v = 0; v < pool_size; ++v) ranks[v][l] = col_ranks[v];
  }
  return ranks;
}

}  // namespace

int multivariate_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                      std::uint64_t rng_seed) {
  check_dimension(ensemble, y, "multivariate_rank");
  const auto pool = build_pool(ensemble, y);
  const std::size_t pool_size = pool.size();
  const std::size_t dim = ensemble.dimension();
  std::vector<double> pre_ranks(pool_size, 0.0);
  for (std::size_t v = 0; v < pool_size; ++v) {
    int dominated = 0;
    for (std::size_t u = 0; u < pool_size; ++u) {
      bool le = true;
      for (std::size_t l = 0; l < dim; ++l) {
        if (pool[u][l] > pool[v][l]) {
          le = false;
          break;
        }
      }
      dominated += le;
    }
    pre_ranks[v] = dominated;
  }
  Rng rng(rng_seed);
  return randomized_rank_of_first(pre_ranks, rng);
}

int band_depth_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                    std::uint64_t rng_seed) {
  check_dimension(ensemble, y, "band_depth_rank");
  const auto pool = build_pool(ensemble, y);
  Rng rng(rng_seed);
  const auto ranks = coordinate_ranks(pool, ensemble.dimension(), rng);
  const double pool_size = static_cast<double>(pool.size());
  std::vector<double> pre_ranks(pool.size(), 0.0);
  for (std::size_t v = 0; v < pool.size(); ++v) {
    double depth = 0.0;
    for (int r : ranks[v]) {
      depth += (pool_size - r) * (r - 1.0);
    }
    pre_ranks[v] = depth / static_cast<double>(ensemble.dimension());
  }
  return randomized_rank_of_first(pre_ranks, rng);
}

int average_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                 std::uint64_t rng_seed) {
  check_dimension(ensemble, y, "average_rank");
  const auto pool = build_pool(ensemble, y);
  Rng rng(rng_seed);
  const auto ranks = coordinate_ranks(pool, ensemble.dimension(), rng);
  std::vector<double> pre_ranks(pool.size(), 0.0);
  for (std::size_t v = 0; v < pool.size(); ++v) {
    double sum = 0.0;
    for (int r : ranks[v]) sum += r;
    pre_ranks[v] = sum / static_cast<double>(ensemble.dimension());
  }
  return randomized_rank_of_first(pre_ranks, rng);
}

const char* rank_kind_name(RankKind kind) {
  switch (kind) {
    case RankKind::Multivariate:
      return "multivariate";
    case RankKind::BandDepth:
      return "band_depth";
    case RankKind::Average:
      return "average";
  }
  return "multivariate";
}

std::vector<std::uint64_t> RankHistogram::rebinned(int k) const {
  if (k <= 0) throw std::invalid_argument("rebinned: k must be positive");
  const std::size_t bins = counts.size();
  std::vector<std::uint64_t> out(static_cast<std::size_t>(k), 0);
  for (int b = 1; b <= k; ++b) {
    const std::size_t lo =
        static_cast<std::size_t>((static_cast<std::uint64_t>(b - 1) * bins + k - 1) / k) + 1;
    const std::size_t hi =
        static_cast<std::size_t>((static_cast<std::uint64_t>(b) * bins + k - 1) / k);
    for (std::size_t rank = lo; rank <= hi && rank <= bins; ++rank) {
      out[b - 1] += counts[rank - 1];
    }
  }
  return out;
}

VerificationReport aggregate(const std::string& method,
                             std::span<const CaseScores> cases,
                             std::size_t ensemble_size) {
  if (cases.empty()) {
    throw std::invalid_argument("aggregate: need at least one case");
  }
  VerificationReport report;
  report.method = method;
  report.cases = cases.size();
  report.ensemble_size = ensemble_size;
  const std::size_t bins = ensemble_size + 1;
  report.multivariate.kind = RankKind::Multivariate;
  report.band_depth.kind = RankKind::BandDepth;
  report.average.kind = RankKind::Average;
  for (RankHistogram* h :
       {&report.multivariate, &report.band_depth, &report.average}) {
    h->counts.assign(bins, 0);
    h->cases = cases.size();
  }

  for (const CaseScores& c : cases) {
    report.mean_es += c.es;
    report.mean_vs += c.vs;
    for (const auto& [id, crps] : c.crps) report.mean_crps[id] += crps;
    for (const auto& [rank, hist] :
         {std::make_pair(c.multivariate_rank, &report.multivariate),
          std::make_pair(c.band_depth_rank, &report.band_depth),
          std::make_pair(c.average_rank, &report.average)}) {
      if (rank < 1 || static_cast<std::size_t>(rank) > bins) {
        throw std::invalid_argument(
            "aggregate: rank " + std::to_string(rank) +
            " inconsistent with ensemble size " +
            std::to_string(ensemble_size));
      }
      ++hist->counts[static_cast<std::size_t>(rank) - 1];
    }
  }
  const double n = static_cast<double>(cases.size());
  report.mean_es /= n;
  report.mean_vs /= n;
  for (auto& [id, crps] : report.mean_crps) crps /= n;
  for (RankHistogram* h :
       {&report.multivariate, &report.band_depth, &report.average}) {
    h->chi2 = chi_squared_uniform(h->counts);
  }
  return report;
}

}  // namespace emcopp
