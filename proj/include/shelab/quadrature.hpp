#pragma once

#include <functional>
#include <limits>

namespace shelab::quad {

using Integrand = std::function<double(double)>;

struct Options {
  double rel_tol = 1e-11;
  /// Length of the first (possibly singular) segment [0, first_segment].
  double first_segment = 1.0;
  /// A stable sub-critical tail exponent is only trusted beyond this radius.
  double divergence_radius = 1e4;
  double max_radius = 1e10;
  int max_depth = 18;
};

enum class Status { Finite, Divergent, Inconclusive };

const char* to_string(Status s) noexcept;

struct HalfLine {
  double value = 0.0;
  Status status = Status::Inconclusive;
  /// Local power-law decay exponent k of the integrand (g ~ r^-k) at the
  /// last probed radius; NaN when the tail decayed faster than any power.
  double tail_power = std::numeric_limits<double>::quiet_NaN();
  double radius = 0.0;
};

/// Integral over [a, b] by tanh-sinh; integrable endpoint singularities are fine.
double finite(const Integrand& f, double a, double b, const Options& opt = {});

/// Integral over [a, b] of a smooth integrand by adaptive Gauss-Kronrod.
/// Bisection stops once the error estimate is below rel_tol * |I| or abs_tol.
double smooth(const Integrand& f, double a, double b, const Options& opt = {},
              double abs_tol = 0.0);

/// Integral of g over [0, limit) (limit may be +inf), classifying the tail.
///
/// The range is covered by [0, r0] followed by doubling segments [R, 2R]. The
/// ratio of consecutive segment integrals gives the local power k of the
/// decay: k > 1 is summable and the remaining tail is integrated after the
/// substitution r = R/u (or extrapolated geometrically when the range ends
/// at a finite `limit`), k < 1 is reported divergent.
HalfLine half_line(const Integrand& g, const Options& opt = {},
                   double limit = std::numeric_limits<double>::infinity());

}  // namespace shelab::quad
