#pragma once

// Adaptive Gauss–Kronrod integration (Boost.Math) with breakpoint splitting.

#include <functional>
#include <span>

namespace wgf {

/// Integrates f over [a, b]; either end may be infinite.  Throws NumericError
/// when the error estimate stays above max(abs_tol, rel_tol * |I|).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Integrates over [a, b] split at the interior points of `breaks` (which
/// need not be sorted; points outside (a, b) are ignored).
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::span<const double> breaks, double abs_tol = 1e-12,
                       double rel_tol = 1e-10);

}  // namespace wgf
