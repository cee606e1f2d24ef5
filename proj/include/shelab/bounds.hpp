#pragma once

#include <ostream>
#include <vector>

#include "shelab/levy.hpp"
#include "shelab/quadrature.hpp"
#include "shelab/spectral.hpp"

namespace shelab::bounds {

struct BoundParams {
  double L_b = 0.0;
  double L_sigma = 1.0;
  double b0 = 0.0;
  double sigma0 = 0.0;
  int p = 2;
  int d = 1;

  void validate() const;
};

struct UpsilonOptions {
  double t_min = 1e-3;
  double t_max = 1e3;
  int grid_points = 40;
  /// Golden-section refinement of the grid maximum.
  bool refine = true;
  quad::Options quad{1e-10};
};

struct UpsilonPoint {
  double t;
  double value;
};

struct UpsilonResult {
  double value = 0.0;
  quad::Status status = quad::Status::Finite;
  /// t at which the sup was found; +inf when the t -> inf reduction wins.
  double t_star = 0.0;
  /// int_0^inf H(u) exp(-2 beta u) du for homogeneous exponents (NaN otherwise).
  double limit = 0.0;
  /// Grid maximum sits at t_max and exceeds the reduction.
  bool sup_not_localized = false;
  std::vector<UpsilonPoint> grid;
};

/// int_0^t int exp[-2s Re Phi((1 - s/t) xi) - 2(t - s) Re Phi((s/t) xi)] exp(-2 beta (t - s)) fhat(xi) dxi ds
/// for one t (throws Divergent when the inner or outer integral diverges).
double upsilon_at(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                  double t, const quad::Options& opt = quad::Options{1e-10});

/// sup over t of upsilon_at.
UpsilonResult upsilon(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                      const UpsilonOptions& opt = {});

struct TildeResult {
  double value = 0.0;
  quad::Status status = quad::Status::Finite;
  double tail_power = 0.0;
};

/// int fhat(xi) / (beta + Re Phi(xi)) dxi over R^d.
TildeResult upsilon_tilde(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                          double beta, const quad::Options& opt = quad::Options{1e-10});

double tau_const(const BoundParams& params);

/// Largest zero of the probabilists' Hermite polynomial He_p (p <= 200).
double hermite_largest_zero(int p);
/// All zeros of He_p in increasing order.
std::vector<double> hermite_zeros(int p);

struct BoundValue {
  double B = 0.0;
  double upsilon = 0.0;
  double upsilon_tilde = 0.0;
  double z_p = 0.0;
};

/// B(beta, p) = L_b / beta + z_p L_sigma (2 pi)^(-d/2) (sqrt(tilde/2) + sqrt(upsilon)).
/// Upsilon values are cached per (phi, cov, beta); divergence throws.
BoundValue bound_constant(double beta, const BoundParams& params, const levy::LevyExponent& phi,
                          const spectral::Covariance& cov, const UpsilonOptions& opt = {});

struct CriticalBeta {
  double beta = 0.0;
  double B_at = 0.0;
  double lower = 0.0;  // B(lower) >= 1
  double upper = 0.0;  // B(upper) < 1
  int evaluations = 0;
};

/// Smallest beta with B(beta, p) < 1 by geometric bisection, to relative
/// width tol. Returns 0 when B < 1 already at beta = 1e-8 (e.g. B = 0).
CriticalBeta critical_beta(const BoundParams& params, const levy::LevyExponent& phi,
                           const spectral::Covariance& cov, double tol = 1e-6,
                           double beta_cap = 1e4, const UpsilonOptions& opt = {});

struct BoundRow {
  double beta;
  BoundValue value;
  int p;
};

std::vector<BoundRow> bound_table(const std::vector<double>& betas, const BoundParams& params,
                                  const levy::LevyExponent& phi, const spectral::Covariance& cov,
                                  const UpsilonOptions& opt = {});

/// beta,upsilon,upsilon_tilde,B,p,z_p
void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows);

/// Number of cached (phi, cov, beta) entries; clear_cache() empties it.
std::size_t cache_size();
void clear_cache();

}  // namespace shelab::bounds
