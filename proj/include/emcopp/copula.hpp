#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emcopp/rng.hpp"
#include "emcopp/types.hpp"

namespace emcopp {

// Dependence template in executable form: one rank permutation per margin,
// derived from an N-tuple data set per margin. Applying it to sorted
// marginal samples transfers the data set's rank dependence structure.
struct RankTemplate {
  enum class Source { Ecc, ClarkSchaake, RandomSchaake, SimSchaake, Custom };

  std::size_t size = 0;                            // N
  std::map<MarginId, std::vector<int>> permutations;  // 1-based ranks
  Source source = Source::Custom;
  std::vector<Date> source_dates;  // provenance for observation-based sources

  static const char* source_name(Source s);
};

struct PostprocessedEnsemble {
  std::map<MarginId, std::vector<double>> members;  // N values per margin
  std::string method;
};

// 1-based ranks of `values` in ascending order; ties are resolved uniformly
// at random from `rng`. The result is always a bijection on {1..N}.
// Throws std::invalid_argument on empty or non-finite input.
std::vector<int> compute_ranks(std::span<const double> values, Rng& rng);
std::vector<int> compute_ranks(std::span<const double> values,
                               std::uint64_t rng_seed);

// Empirical copula induced by the template's data set, evaluated at the
// integer grid point (i_1/N, ..., i_L/N) with margins in MarginId order:
// (1/N) sum_n prod_l 1{rank(z_n^l) <= i_l}. Indices must lie in 0..N.
double empirical_copula_eval(const RankTemplate& tmpl,
                             std::span<const int> indices);

// Builds a template from one N-tuple per margin. Each margin gets an
// independent tie-break stream derived from `rng_seed`.
RankTemplate derive_template(
    const std::map<MarginId, std::vector<double>>& data,
    std::uint64_t rng_seed,
    RankTemplate::Source source = RankTemplate::Source::Custom);

// Arranges per-margin order statistics by the template's rank structure:
// output member n at margin l is samples_l[pi_l(n)]. Samples must be
// ascending (they are order statistics; sorting here would mask caller
// bugs). Marginal multisets are preserved exactly.
PostprocessedEnsemble reorder(
    const std::map<MarginId, std::vector<double>>& sorted_samples,
    const RankTemplate& tmpl, std::string method = {});

}  // namespace emcopp
