#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "shelab/error.hpp"

namespace shelab {

/// Uniform periodic lattice on [-half_extent, half_extent) in each of `dim`
/// axes, `n` points per axis. Points are x_j = -half_extent + j * spacing();
/// the dual lattice holds xi_k = 2*pi*k/period() with k wrapped to [-n/2, n/2).
struct GridSpec {
  double half_extent = 8.0;
  std::size_t n = 1024;
  int dim = 1;

  double period() const { return 2.0 * half_extent; }
  double spacing() const { return period() / static_cast<double>(n); }
  double x(std::size_t j) const {
    return -half_extent + static_cast<double>(j) * spacing();
  }
  double dxi() const { return 2.0 * std::numbers::pi / period(); }
  long signed_index(std::size_t k) const {
    const long kk = static_cast<long>(k);
    const long nn = static_cast<long>(n);
    return kk < nn / 2 ? kk : kk - nn;
  }
  double xi(std::size_t k) const {
    return dxi() * static_cast<double>(signed_index(k));
  }
  double nyquist() const { return std::numbers::pi / spacing(); }
  std::size_t total_points() const {
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= n;
    return total;
  }

  void validate() const {
    require(half_extent > 0.0 && std::isfinite(half_extent),
            ErrorCode::InvalidArgument, "grid half-extent must be positive");
    require(n >= 8 && n % 2 == 0, ErrorCode::InvalidArgument,
            "grid size must be even and at least 8");
    require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument,
            "grid dimension must be 1, 2 or 3");
    require(total_points() <= (std::size_t{1} << 24), ErrorCode::SizeLimit,
            "grid exceeds 2^24 points");
  }
};

}  // namespace shelab
