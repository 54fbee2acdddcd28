#include "emcopp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emcopp {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double simplex_diameter(const std::vector<Vertex>& simplex) {
  double diameter = 0.0;
  const std::vector<double>& best = simplex.front().x;
  for (std::size_t v = 1; v < simplex.size(); ++v) {
    for (std::size_t i = 0; i < best.size(); ++i) {
      diameter = std::max(diameter, std::fabs(simplex[v].x[i] - best[i]));
    }
  }
  return diameter;
}

SimplexResult run_once(const std::function<double(const std::vector<double>&)>& f,
                       const std::vector<double>& start,
                       const std::vector<double>& steps,
                       const SimplexOptions& options, int& evaluations) {
  const std::size_t dim = start.size();
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({start, f(start)});
  ++evaluations;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> x = start;
    x[i] += steps[i];
    simplex.push_back({x, f(x)});
    ++evaluations;
  }

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  const int max_iterations = options.max_iterations_per_dim * static_cast<int>(dim);

  SimplexResult result;
  for (int iteration = 0; iteration < max_iterations; ++iteration) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double diameter = simplex_diameter(simplex);
    if (diameter < options.diameter_tolerance) {
      result.converged = true;
      result.final_diameter = diameter;
      break;
    }
    result.final_diameter = diameter;

    // Centroid of all but the worst vertex.
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t v = 0; v < dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    Vertex& worst = simplex.back();
    std::vector<double> reflected(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      reflected[i] = centroid[i] + alpha * (centroid[i] - worst.x[i]);
    }
    const double f_reflected = f(reflected);
    ++evaluations;

    if (f_reflected < simplex.front().f) {
      std::vector<double> expanded(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        expanded[i] = centroid[i] + gamma * (reflected[i] - centroid[i]);
      }
      const double f_expanded = f(expanded);
      ++evaluations;
      if (f_expanded < f_reflected) {
        worst = {std::move(expanded), f_expanded};
      } else {
        worst = {std::move(reflected), f_reflected};
      }
      continue;
    }
    if (f_reflected < simplex[dim - 1].f) {
      worst = {std::move(reflected), f_reflected};
      continue;
    }

    std::vector<double> contracted(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      contracted[i] = centroid[i] + rho * (worst.x[i] - centroid[i]);
    }
    const double f_contracted = f(contracted);
    ++evaluations;
    if (f_contracted < worst.f) {
      worst = {std::move(contracted), f_contracted};
      continue;
    }

    // Shrink toward the best vertex.
    for (std::size_t v = 1; v <= dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) {
        simplex[v].x[i] =
            simplex[0].x[i] + sigma * (simplex[v].x[i] - simplex[0].x[i]);
      }
      simplex[v].f = f(simplex[v].x);
      ++evaluations;
    }
  }

  std::sort(simplex.begin(), simplex.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  result.x = simplex.front().x;
  result.value = simplex.front().f;
  return result;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, std::vector<double> steps,
                          const SimplexOptions& options) {
  if (start.empty() || steps.size() != start.size()) {
    throw std::invalid_argument("nelder_mead: start/steps size mismatch");
  }
  int evaluations = 0;
  SimplexResult best = run_once(f, start, steps, options, evaluations);
  for (int restart = 0; restart < options.restarts; ++restart) {
    std::vector<double> shrunk = steps;
    for (double& s : shrunk) s *= 0.1;
    SimplexResult next = run_once(f, best.x, shrunk, options, evaluations);
    if (next.value <= best.value) {
      next.converged = next.converged || best.converged;
      best = std::move(next);
    }
  }
  best.evaluations = evaluations;
  return best;
}

}  // namespace emcopp
