#pragma once

namespace enachi {

/// Principal branch W0 of the Lambert W function: the w >= -1 with w e^w = x.
/// Halley iteration from a logarithmic initial guess, at most 50 steps.
/// Throws std::domain_error for x < -1/e.
[[nodiscard]] double lambert_w0(double x);

/// Extended-precision variant. In double precision the residual w e^w - x
/// cannot be resolved below ~1e-9 near x = 1e6 (one ulp of w moves the
/// product by that much), so checks on absolute residuals use this one.
[[nodiscard]] long double lambert_w0l(long double x);

}  // namespace enachi
