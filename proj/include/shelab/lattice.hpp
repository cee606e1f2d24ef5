#pragma once

#include <functional>
#include <span>
#include <vector>

namespace shelab::lattice {

/// Cross-correlation c_m = h * sum_j a[j + m] b[j] for lags m = -(n-1) .. n-1,
/// stored at index m + n - 1. Computed with a zero-padded FFT, so nothing wraps.
std::vector<double> correlate(std::span<const double> a, std::span<const double> b, double h);

/// int_R f(|r|) c(r) dr where c is known at lattice lags m*h (layout of
/// `correlate`) and f may carry an integrable singularity at r = 0.
/// Between lags, c is represented by local degree-7 Lagrange interpolation.
double integrate_even_weight(const std::function<double(double)>& f,
                             std::span<const double> lags, double h);

}  // namespace shelab::lattice
