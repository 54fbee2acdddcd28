#pragma once

#include <functional>
#include <vector>

namespace emcopp {

struct SimplexOptions {
  double diameter_tolerance = 1e-8;  // max vertex distance to best, inf norm
  int max_iterations_per_dim = 500;
  int restarts = 2;  // fresh simplexes re-seeded at the incumbent optimum
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
  double final_diameter = 0.0;
};

// Derivative-free Nelder-Mead minimization with restarts. `steps` gives the
// initial simplex edge length per coordinate. Deterministic for fixed
// inputs.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, std::vector<double> steps,
                          const SimplexOptions& options = {});

}  // namespace emcopp
