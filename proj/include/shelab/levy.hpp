#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shelab/grid.hpp"
#include "shelab/quadrature.hpp"

namespace shelab::levy {

using cplx = std::complex<double>;

enum class Family { BrownianHalfLaplacian, StableSkewed, Tabulated };

const char* to_string(Family f) noexcept;

/// Characteristic exponent Phi of a Levy process, E exp(i xi X_t) = exp(-t Phi(xi)).
///
/// Stable convention: Phi(xi) = C |xi|^a [cos(pi theta/2) - i sin(pi theta/2) sgn(xi)],
/// which reduces to C |xi|^2 for a = 2 (C = 1/2 is the generator (1/2) Laplacian).
/// Tabulated exponents are one-dimensional, given on a lattice 0 = xi_0 < ... < xi_m,
/// linearly interpolated, and extended to xi < 0 by conjugation.
class LevyExponent {
 public:
  static LevyExponent stable(double a, double theta, double scale, int dim);
  static LevyExponent tabulated(std::vector<double> xi, std::vector<cplx> phi);

  Family family() const { return family_; }
  double a() const { return a_; }
  double theta() const { return theta_; }
  double scale() const { return scale_; }
  int dim() const { return dim_; }

  cplx operator()(std::span<const double> xi) const;
  /// One-dimensional evaluation (dim must be 1).
  cplx at(double xi) const;
  /// Re Phi(r e_1). All supported families are isotropic in Re Phi.
  double re_radial(double r) const;

  /// Degree of homogeneity of Re Phi when it is a pure power of |xi|.
  std::optional<double> homogeneity() const;
  /// Largest |xi| at which Phi may be evaluated (+inf for closed forms).
  double frequency_limit() const;
  std::string convention() const;
  /// Stable identity string, used for caching.
  std::string fingerprint() const;

 private:
  LevyExponent() = default;
  cplx eval_1d(double xi) const;

  Family family_ = Family::BrownianHalfLaplacian;
  double a_ = 2.0;
  double theta_ = 0.0;
  double scale_ = 0.5;
  int dim_ = 1;
  std::vector<double> tab_xi_;
  std::vector<cplx> tab_phi_;
};

LevyExponent make_stable_exponent(double a, double theta, double scale, int dim);
cplx evaluate_exponent(const LevyExponent& phi, std::span<const double> xi);

struct Atom {
  double location = 0.0;
  double weight = 1.0;
};

class InitialMeasure {
 public:
  enum class Kind { Dirac, Lebesgue, AtomMix, DensityGrid };

  static InitialMeasure dirac(double location);
  static InitialMeasure lebesgue();
  static InitialMeasure atoms(std::vector<Atom> atoms);
  /// Density sampled on a one-dimensional grid (trapezoid/lattice weights).
  static InitialMeasure density(GridSpec grid, std::vector<double> values);

  Kind kind() const { return kind_; }
  const std::vector<Atom>& atom_list() const { return atoms_; }
  const GridSpec& density_grid() const { return grid_; }
  const std::vector<double>& density_values() const { return values_; }
  /// +inf for Lebesgue.
  double total_mass() const;
  /// Fourier transform int exp(-i xi y) mu(dy); not defined for Lebesgue.
  cplx fourier(double xi) const;

 private:
  InitialMeasure() = default;

  Kind kind_ = Kind::Lebesgue;
  std::vector<Atom> atoms_;
  GridSpec grid_{};
  std::vector<double> values_;
};

const char* to_string(InitialMeasure::Kind k) noexcept;

struct KernelGrid {
  double t = 0.0;
  GridSpec grid;
  /// p_t at the lattice points, row-major for dim > 1.
  std::vector<double> values;
  /// exp(-t Phi(xi_k)) on the dual lattice in FFT order.
  std::vector<cplx> fourier;
  /// Most negative value before clipping (0 when nothing was clipped).
  double min_before_clip = 0.0;
  std::size_t clipped = 0;

  double mass() const;
  double peak() const;
};

struct IntegrabilityRow {
  double t = 0.0;
  quad::Status status = quad::Status::Inconclusive;
  bool finite() const { return status == quad::Status::Finite; }
  double value = 0.0;
};

/// Decides for each t whether int exp(-t Re Phi(xi)) d xi is finite.
std::vector<IntegrabilityRow> check_integrability(const LevyExponent& phi,
                                                  std::span<const double> times,
                                                  const quad::Options& opt = {});

/// Grid whose extent keeps the mass of p_t outside it below `mass_budget`
/// and whose Nyquist frequency resolves exp(-t Phi) down to 1e-12.
GridSpec default_grid(const LevyExponent& phi, double t, double mass_budget = 1e-8);

KernelGrid transition_density(const LevyExponent& phi, double t, const GridSpec& grid);

/// p_t(x) by direct quadrature of the inversion integral (dim 1).
double density_at(const LevyExponent& phi, double t, double x,
                  const quad::Options& opt = {});

/// max_j |(p_t * p_s)(x_j) - p_{t+s}(x_j)| with the convolution evaluated as
/// a lattice sum in physical space (periodic lattice, dim 1).
double semigroup_defect(const LevyExponent& phi, double t, double s, const GridSpec& grid);

/// (p_t * mu)(x_j) on the kernel's lattice (dim 1).
std::vector<double> convolve_initial(const KernelGrid& kernel, const InitialMeasure& mu);

struct AdmissibilityRow {
  double t = 0.0;
  double x = 0.0;
  quad::Status status = quad::Status::Inconclusive;
  double value = 0.0;
  bool boundary_mass = false;
  bool tail_growth = false;
};

std::vector<AdmissibilityRow> check_initial_admissible(const LevyExponent& phi,
                                                       const InitialMeasure& mu,
                                                       std::span<const double> times,
                                                       std::span<const double> points,
                                                       const quad::Options& opt = {});

/// CSV with header rows (t, extent, n, convention) followed by x,value rows.
void write_kernel_csv(std::ostream& out, const KernelGrid& kernel, const LevyExponent& phi);

}  // namespace shelab::levy
