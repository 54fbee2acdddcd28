#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emcopp/stats.hpp"
#include "emcopp/types.hpp"

namespace emcopp {

// Pairwise station distances in one consistent unit (km). Symmetric,
// strictly positive off the diagonal.
class StationGeometry {
 public:
  void set_distance(const std::string& a, const std::string& b, double km);
  double distance(const std::string& a, const std::string& b) const;
  bool has_distance(const std::string& a, const std::string& b) const;

  const std::map<std::pair<std::string, std::string>, double>& entries()
      const {
    return distances_;
  }

 private:
  std::map<std::pair<std::string, std::string>, double> distances_;
};

// Ensemble as N vectors in R^L (member-major) plus the margin order that
// gives each coordinate its meaning.
struct EnsembleMatrix {
  std::vector<MarginId> margins;            // L entries
  std::vector<std::vector<double>> members;  // N rows, each of length L

  std::size_t n_members() const { return members.size(); }
  std::size_t dimension() const { return margins.size(); }
};

EnsembleMatrix to_matrix(const std::map<MarginId, std::vector<double>>& members);

// (1/N) sum |x_n - y| - 1/(2N^2) sum sum |x_nu - x_n|.
double crps_ensemble(std::span<const double> members, double y);

// Energy score, the multivariate CRPS analog with the Euclidean norm.
double energy_score(const EnsembleMatrix& ensemble,
                    std::span<const double> y);

// Inverse-distance weights w_{l,lambda} ~ 1/dist(station_l, station_lambda),
// normalized so the off-diagonal total is 1; zero diagonal.
std::vector<std::vector<double>> vs_weights(const StationGeometry& geometry,
                                            const std::vector<MarginId>& margins);

// Variogram score of order 1/2 with the given nonnegative weights.
double variogram_score(const EnsembleMatrix& ensemble,
                       std::span<const double> y,
                       const std::vector<std::vector<double>>& weights);

// Multivariate, band-depth and average ranks of y within the pool
// {y, x_1..x_N}; all return a value in 1..N+1 with ties resolved uniformly
// at random from the seed.
int multivariate_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                      std::uint64_t rng_seed);
int band_depth_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                    std::uint64_t rng_seed);
int average_rank(const EnsembleMatrix& ensemble, std::span<const double> y,
                 std::uint64_t rng_seed);

enum class RankKind { Multivariate, BandDepth, Average };
const char* rank_kind_name(RankKind kind);

struct RankHistogram {
  RankKind kind = RankKind::Multivariate;
  std::vector<std::uint64_t> counts;  // N+1 bins for ranks 1..N+1
  std::uint64_t cases = 0;
  Chi2Result chi2;

  // Rebinned counts: bin b (1-based) aggregates ranks
  // ceil((b-1)(N+1)/k)+1 .. ceil(b(N+1)/k).
  std::vector<std::uint64_t> rebinned(int k = 10) const;
};

// Scores and rank statistics of a single forecast case.
struct CaseScores {
  double es = 0.0;
  double vs = 0.0;
  std::map<MarginId, double> crps;
  int multivariate_rank = 0;
  int band_depth_rank = 0;
  int average_rank = 0;
};

struct VerificationReport {
  std::string method;
  std::uint64_t cases = 0;
  std::size_t ensemble_size = 0;  // N; histograms have N+1 bins
  double mean_es = 0.0;
  double mean_vs = 0.0;
  std::map<MarginId, double> mean_crps;
  RankHistogram multivariate;
  RankHistogram band_depth;
  RankHistogram average;
};

// Arithmetic mean of scores and summed histogram counts over cases; each
// histogram carries its chi-squared-against-uniform statistic. All cases
// must share one ensemble size.
VerificationReport aggregate(const std::string& method,
                             std::span<const CaseScores> cases,
                             std::size_t ensemble_size);

}  // namespace emcopp
