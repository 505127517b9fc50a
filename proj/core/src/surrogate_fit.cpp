#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "enachi/model_profile.hpp"

namespace enachi {
namespace {

// Fit parameters live in an unconstrained space:
//   a0 = exp(x0), a1 = a0 * sigmoid(x1), a2 = exp(x2).
using Params = std::array<double, 3>;

struct Decoded {
  double a0, a1, a2;
};

Decoded decode(const Params& x) {
  const double a0 = std::exp(x[0]);
  const double r = 1.0 / (1.0 + std::exp(-x[1]));
  return {a0, a0 * r, std::exp(x[2])};
}

double model(const Decoded& c, double beta) {
  const double zc = (c.a1 + 1.0 / c.a2) / c.a0;
  if (beta <= zc) return 0.0;
  return std::clamp(c.a2 - 1.0 / (c.a0 * beta - c.a1), 0.0, 1.0);
}

double sse(const Params& x, std::span<const std::pair<double, double>> samples) {
  const Decoded c = decode(x);
  double s = 0.0;
  for (const auto& [beta, acc] : samples) {
    const double r = model(c, beta) - acc;
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

Params nelder_mead(Params start, std::span<const std::pair<double, double>> samples) {
  constexpr int kDim = 3;
  constexpr int kMaxIter = 4000;
  std::array<Params, kDim + 1> simplex{};
  std::array<double, kDim + 1> value{};
  simplex[0] = start;
  for (int i = 0; i < kDim; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += 0.25;
  }
  for (int i = 0; i <= kDim; ++i) value[i] = sse(simplex[i], samples);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    std::array<int, kDim + 1> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
    const int best = idx[0];
    const int worst = idx[kDim];
    const int second = idx[kDim - 1];

    double spread = 0.0;
    for (int i = 1; i <= kDim; ++i) {
      for (int d = 0; d < kDim; ++d) {
        spread = std::max(spread, std::abs(simplex[idx[i]][d] - simplex[best][d]));
      }
    }
    if (spread < 1e-13 || value[best] < 1e-28) break;

    Params centroid{};
    for (int i = 0; i < kDim; ++i) {
      for (int d = 0; d < kDim; ++d) centroid[d] += simplex[idx[i]][d] / kDim;
    }
    auto along = [&](double t) {
      Params p{};
      for (int d = 0; d < kDim; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };

    const Params reflected = along(-1.0);
    const double fr = sse(reflected, samples);
    if (fr < value[best]) {
      const Params expanded = along(-2.0);
      const double fe = sse(expanded, samples);
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
      continue;
    }
    if (fr < value[second]) {
      simplex[worst] = reflected;
      value[worst] = fr;
      continue;
    }
    const bool outside = fr < value[worst];
    const Params contracted = along(outside ? -0.5 : 0.5);
    const double fc = sse(contracted, samples);
    if (fc < (outside ? fr : value[worst])) {
      simplex[worst] = contracted;
      value[worst] = fc;
      continue;
    }
    for (int i = 1; i <= kDim; ++i) {
      for (int d = 0; d < kDim; ++d) {
        simplex[idx[i]][d] = simplex[best][d] + 0.5 * (simplex[idx[i]][d] - simplex[best][d]);
      }
      value[idx[i]] = sse(simplex[idx[i]], samples);
    }
  }
  const auto it = std::min_element(value.begin(), value.end());
  return simplex[static_cast<std::size_t>(it - value.begin())];
}

}  // namespace

SurrogateFit fit_surrogate(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) throw std::invalid_argument("fit_surrogate: need >= 3 samples");
  std::vector<double> betas;
  for (const auto& [beta, acc] : samples) {
    if (!(beta >= 0.0 && beta <= 1.0) || !std::isfinite(acc)) {
      throw std::invalid_argument("fit_surrogate: beta must lie in [0, 1]");
    }
    betas.push_back(beta);
  }
  std::sort(betas.begin(), betas.end());
  if (std::adjacent_find(betas.begin(), betas.end()) != betas.end()) {
    throw std::invalid_argument("fit_surrogate: betas must be distinct");
  }

  const double first = samples.front().second;
  const bool constant = std::all_of(samples.begin(), samples.end(),
                                    [&](const auto& s) { return s.second == first; });
  if (constant) {
    // A flat curve is the a0 -> infinity limit of the hyperbola.
    SurrogateFit fit;
    fit.degenerate = true;
    if (first > 0.0) fit.coeffs = SurrogateCoefficients(1e6, 0.0, first);
    double s = 0.0;
    for (const auto& [beta, acc] : samples) {
      const double r = (first > 0.0 ? surrogate_accuracy(fit.coeffs, beta) : 0.0) - acc;
      s += r * r;
    }
    fit.rmse = std::sqrt(s / static_cast<double>(samples.size()));
    return fit;
  }

  struct Candidate {
    Params x;
    double value;
  };
  std::vector<Candidate> grid;
  for (int i = 0; i < 24; ++i) {
    const double a0 = 0.5 * std::pow(400.0, i / 23.0);
    for (int j = 0; j < 12; ++j) {
      const double r = 0.02 + 0.93 * j / 11.0;
      for (int k = 0; k < 20; ++k) {
        const double a2 = 0.05 + 1.95 * k / 19.0;
        const Params x{std::log(a0), std::log(r / (1.0 - r)), std::log(a2)};
        grid.push_back({x, sse(x, samples)});
      }
    }
  }
  const std::size_t keep = std::min<std::size_t>(4, grid.size());
  std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(keep), grid.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  Params best = grid.front().x;
  double best_value = grid.front().value;
  for (std::size_t i = 0; i < keep; ++i) {
    Params x = nelder_mead(grid[i].x, samples);
    x = nelder_mead(x, samples);  // restart from the shrunken simplex
    const double v = sse(x, samples);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }

  const Decoded c = decode(best);
  SurrogateFit fit;
  try {
    fit.coeffs = SurrogateCoefficients(c.a0, c.a1, c.a2);
  } catch (const std::invalid_argument&) {
    // Best fit is identically zero on [0, 1].
    fit.degenerate = true;
  }
  fit.rmse = std::sqrt(best_value / static_cast<double>(samples.size()));
  return fit;
}

}  // namespace enachi
