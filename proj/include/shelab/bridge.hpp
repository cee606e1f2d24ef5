#pragma once

#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "shelab/grid.hpp"
#include "shelab/levy.hpp"
#include "shelab/quadrature.hpp"
#include "shelab/rng.hpp"
#include "shelab/spectral.hpp"

namespace shelab::bridge {

using cplx = std::complex<double>;

/// Levy process pinned at z at time 0 and at x at time t, observed at s.
struct BridgeSpec {
  levy::LevyExponent phi;
  double z = 0.0;
  double x = 0.0;
  double t = 1.0;
  double s = 0.5;

  void validate() const;
};

struct BridgeDensity {
  GridSpec grid;
  /// q(y_j) = p_{t-s}(x - y_j) p_s(y_j - z) / p_t(x - z)
  std::vector<double> values;
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// One-dimensional lattice with dyadic spacing fine enough for p_s and
/// p_{t-s}, wide enough for the endpoints and the spread of p_t. Every point
/// in `anchors` lies on the lattice.
GridSpec bridge_grid(const levy::LevyExponent& phi, double t, double s,
                     std::initializer_list<double> anchors);

/// Kernel quotient on `grid`. z and x must be lattice points; kernels are
/// the periodic lattice kernels of the grid, so the mass is 1 up to rounding.
BridgeDensity bridge_density(const BridgeSpec& spec, const GridSpec& grid);

/// exp(-s Phi((1 - s/t) xi) - (t - s) Phi(-(s/t) xi)) exp(i xi (z + (s/t)(x - z)))
cplx bridge_char_fn(const BridgeSpec& spec, double xi);

/// Position at time s from the decomposition
/// (1 - s/t) X_s - (s/t)(X_t - X_s) + z + (s/t)(x - z)
/// with independent exact increments. This is the bridge law for Gaussian
/// processes; for other stable laws it is the law whose characteristic
/// function is bridge_char_fn, not the kernel quotient.
double sample_bridge(const BridgeSpec& spec, Rng& rng);

struct CfConsistency {
  /// max relative modulus error and max absolute phase error over dual
  /// frequencies where |cf| >= floor
  double modulus_err = 0.0;
  double phase_err = 0.0;
  double floor = 1e-4;
  std::size_t compared = 0;
  double max_error() const { return std::max(modulus_err, phase_err); }
};

/// Lattice Fourier transform of bridge_density against bridge_char_fn.
CfConsistency check_cf_consistency(const BridgeSpec& spec, const GridSpec& grid,
                                   double floor = 1e-4);

struct BridgeBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool holds = false;
  double h = 0.0;
};

/// LHS = int int q_1(y_1) q_2(y_2) f(y_1 - y_2), q_i the bridges from z_i to x;
/// RHS = (2 pi)^-1 int exp[-2s Re Phi((1 - s/t) xi) - 2(t - s) Re Phi((s/t) xi)] fhat(xi).
/// Verdict: LHS <= RHS (1 + 1e-6). The LHS is recomputed at half spacing
/// and must agree to 1e-4.
BridgeBound verify_bridge_bound(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                                double z1, double z2, double x, double t, double s,
                                const quad::Options& opt = {});

struct BridgeCase {
  std::string exponent;  // "gaussian" or "stable1.5"
  std::string noise;     // "white" or "riesz0.5"
  double z1, z2, x, t, s;
};

struct BridgeCaseResult {
  BridgeCase c;
  BridgeBound bound;
};

/// {Gaussian, a = 1.5} x {white, Riesz 1/2} x 5 (s, t) x 3 endpoint triples.
std::vector<BridgeCase> standard_matrix();
levy::LevyExponent case_exponent(const BridgeCase& c);
spectral::Covariance case_covariance(const BridgeCase& c);
std::vector<BridgeCaseResult> run_matrix(const std::vector<BridgeCase>& cases,
                                         const quad::Options& opt = {});

/// One row per case: exponent,noise,z1,z2,x,t,s,lhs,rhs,ratio,holds
void write_bridge_csv(std::ostream& out, const std::vector<BridgeCaseResult>& rows);

}  // namespace shelab::bridge
