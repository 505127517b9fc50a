#include "enachi/lambert_w.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace enachi {
namespace {

template <typename Real>
Real initial_guess(Real x) {
  const Real e = std::numbers::e_v<Real>;
  if (x < Real(-0.25)) {
    // Series around the branch point -1/e.
    const Real p = std::sqrt(2 * (e * x + 1));
    return -1 + p - p * p / 3 + Real(11) / 72 * p * p * p;
  }
  if (x < e) {
    const Real l = std::log1p(x);
    return l * (1 - std::log1p(l) / (2 + l));
  }
  const Real l1 = std::log(x);
  const Real l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

template <typename Real>
Real lambert_w0_impl(Real x) {
  const Real inv_e = 1 / std::numbers::e_v<Real>;
  if (std::isnan(x)) throw std::domain_error("lambert_w0: NaN argument");
  if (x < -inv_e) {
    // Allow a few ulps of slack so that -1/e computed by the caller is accepted.
    if (x < -inv_e * (1 + 8 * std::numeric_limits<Real>::epsilon())) {
      throw std::domain_error("lambert_w0: argument below -1/e");
    }
    return Real(-1);
  }
  if (x == 0) return 0;
  if (std::isinf(x)) return x;

  constexpr int kMaxIterations = 50;
  const Real tol = 4 * std::numeric_limits<Real>::epsilon();
  Real w = initial_guess(x);
  for (int i = 0; i < kMaxIterations; ++i) {
    const Real ew = std::exp(w);
    const Real f = w * ew - x;
    if (f == 0) break;
    const Real wp1 = w + 1;
    if (wp1 == 0) break;  // exactly at the branch point
    const Real step = f / (ew * wp1 - (w + 2) * f / (2 * wp1));
    w -= step;
    if (std::abs(step) <= tol * (1 + std::abs(w))) break;
  }
  return w;
}

}  // namespace

double lambert_w0(double x) { return lambert_w0_impl<double>(x); }

long double lambert_w0l(long double x) { return lambert_w0_impl<long double>(x); }

}  // namespace enachi
