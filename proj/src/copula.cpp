#include "emcopp/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emcopp {

const char* RankTemplate::source_name(Source s) {
  switch (s) {
    case Source::Ecc:
      return "ecc";
    case Source::ClarkSchaake:
      return "clark_schaake";
    case Source::RandomSchaake:
      return "random_schaake";
    case Source::SimSchaake:
      return "simschaake";
    case Source::Custom:
      return "custom";
  }
  return "custom";
}

std::vector<int> compute_ranks(std::span<const double> values, Rng& rng) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("compute_ranks: empty input");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("compute_ranks: non-finite value at index " +
                                  std::to_string(i + 1));
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Random pre-shuffle followed by a stable sort puts tied values in a
  // uniformly random relative order.
  rng.shuffle(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  std::vector<int> ranks(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    ranks[order[pos]] = static_cast<int>(pos) + 1;
  }
  return ranks;
}

std::vector<int> compute_ranks(std::span<const double> values,
                               std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return compute_ranks(values, rng);
}

double empirical_copula_eval(const RankTemplate& tmpl,
                             std::span<const int> indices) {
  if (indices.size() != tmpl.permutations.size()) {
    throw std::invalid_argument(
        "empirical_copula_eval: expected one index per margin (" +
        std::to_string(tmpl.permutations.size()) + "), got " +
        std::to_string(indices.size()));
  }
  const int n = static_cast<int>(tmpl.size);
  for (int idx : indices) {
    if (idx < 0 || idx > n) {
      throw std::invalid_argument("empirical_copula_eval: index " +
                                  std::to_string(idx) + " outside 0.." +
                                  std::to_string(n));
    }
  }
  std::size_t inside = 0;
  for (int member = 0; member < n; ++member) {
    bool in_box = true;
    std::size_t margin = 0;
    for (const auto& [id, perm] : tmpl.permutations) {
      if (perm[member] > indices[margin]) {
        in_box = false;
        break;
      }
      ++margin;
    }
    inside += in_box;
  }
  return static_cast<double>(inside) / static_cast<double>(n);
}

RankTemplate derive_template(
    const std::map<MarginId, std::vector<double>>& data,
    std::uint64_t rng_seed, RankTemplate::Source source) {
  if (data.empty()) throw std::invalid_argument("derive_template: no margins");
  const std::size_t n = data.begin()->second.size();
  RankTemplate tmpl;
  tmpl.size = n;
  tmpl.source = source;
  std::uint64_t margin_ordinal = 0;
  for (const auto& [id, values] : data) {
    if (values.size() != n) {
      throw std::invalid_argument(
          "derive_template: margin " + id.to_string() + " has " +
          std::to_string(values.size()) + " values, expected " +
          std::to_string(n));
    }
    Rng rng(derive_seed(rng_seed, "tie_break", margin_ordinal++));
    try {
      tmpl.permutations.emplace(id, compute_ranks(values, rng));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("derive_template: margin " + id.to_string() +
                                  ": " + e.what());
    }
  }
  return tmpl;
}

PostprocessedEnsemble reorder(
    const std::map<MarginId, std::vector<double>>& sorted_samples,
    const RankTemplate& tmpl, std::string method) {
  if (sorted_samples.size() != tmpl.permutations.size()) {
    throw std::invalid_argument("reorder: sample margins (" +
                                std::to_string(sorted_samples.size()) +
                                ") do not match template margins (" +
                                std::to_string(tmpl.permutations.size()) + ")");
  }
  PostprocessedEnsemble out;
  out.method = method.empty() ? RankTemplate::source_name(tmpl.source)
                              : std::move(method);
  auto sample_it = sorted_samples.begin();
  for (const auto& [id, perm] : tmpl.permutations) {
    if (sample_it->first != id) {
      throw std::invalid_argument("reorder: margin mismatch, template has " +
                                  id.to_string() + ", samples have " +
                                  sample_it->first.to_string());
    }
    const std::vector<double>& samples = sample_it->second;
    if (samples.size() != tmpl.size) {
      throw std::invalid_argument(
          "reorder: margin " + id.to_string() + " has " +
          std::to_string(samples.size()) + " samples, template size is " +
          std::to_string(tmpl.size));
    }
    if (!std::is_sorted(samples.begin(), samples.end())) {
      throw std::invalid_argument("reorder: samples at margin " +
                                  id.to_string() +
                                  " must be in ascending order");
    }
    std::vector<double> arranged(tmpl.size);
    for (std::size_t n = 0; n < tmpl.size; ++n) {
      arranged[n] = samples[static_cast<std::size_t>(perm[n]) - 1];
    }
    out.members.emplace(id, std::move(arranged));
    ++sample_it;
  }
  return out;
}

}  // namespace emcopp
