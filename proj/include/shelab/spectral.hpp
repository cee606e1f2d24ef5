#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shelab/fft.hpp"
#include "shelab/grid.hpp"
#include "shelab/levy.hpp"
#include "shelab/quadrature.hpp"
#include "shelab/rng.hpp"

namespace shelab::spectral {

enum class CovKind { White, Riesz, GaussianBump, Tabulated };

const char* to_string(CovKind k) noexcept;

/// Spatial noise correlation f together with its spectral density
/// fhat(xi) = int f(x) exp(-i x xi) dx. All kinds are isotropic, so both are
/// evaluated as functions of the radius |x| or |xi|.
class Covariance {
 public:
  static Covariance white(int dim);
  /// f(x) = |x|^-alpha, fhat = c(alpha, d) |xi|^(alpha - d). The constant is
  /// calibrated numerically on a Gaussian test measure.
  static Covariance riesz(double alpha, int dim);
  /// f(x) = exp(-|x|^2 / (2 w^2)), fhat = (2 pi w^2)^(d/2) exp(-w^2 |xi|^2 / 2).
  static Covariance gaussian_bump(double width, int dim);
  /// One-dimensional tables on radial lattices starting at 0, linearly
  /// interpolated; `r`/`f` may be empty when only the spectral side is known.
  static Covariance tabulated(std::vector<double> xi, std::vector<double> fhat,
                              std::vector<double> r = {}, std::vector<double> f = {});

  CovKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double width() const { return width_; }
  double riesz_constant() const { return riesz_c_; }

  bool has_function() const;
  double f(double r) const;
  double fhat(double rho) const;
  bool singular_at_origin() const { return kind_ == CovKind::Riesz; }
  bool spectrally_singular_at_origin() const { return kind_ == CovKind::Riesz; }
  /// Degree of homogeneity of fhat when it is a pure power of |xi|.
  std::optional<double> spectral_homogeneity() const;
  double spectral_limit() const;
  std::string fingerprint() const;

 private:
  Covariance() = default;

  CovKind kind_ = CovKind::White;
  int dim_ = 1;
  double alpha_ = 0.0;
  double width_ = 1.0;
  double riesz_c_ = 1.0;
  std::vector<double> tab_xi_, tab_fhat_, tab_r_, tab_f_;
};

struct CovarianceParams {
  double alpha = 0.5;
  double width = 1.0;
};

Covariance make_covariance(CovKind kind, const CovarianceParams& params, int dim);

/// Radial integral int_{R^d} g(|xi|) d xi with the surface factor applied.
quad::HalfLine radial_integral(const std::function<double(double)>& g, int dim,
                               const quad::Options& opt, double limit);

struct ParsevalReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  /// Both sides infinite (e.g. a point mass against a singular f).
  bool both_divergent = false;
};

/// Compares int int f(x - y) nu(dx) nu(dy) (physical space) with
/// (2 pi)^-d int fhat |nuhat|^2 (frequency space). nu is atomic or a gridded
/// density in dimension 1.
ParsevalReport parseval_check(const Covariance& cov, const levy::InitialMeasure& nu,
                              const quad::Options& opt = {});

/// Generator of increments W(dt, x_j) on a periodic lattice: independent
/// complex Gaussians scaled by sqrt(fhat(xi_k) dt / L), Hermitian-symmetrized
/// and inverted. White noise therefore has variance dt / dx per cell.
class NoiseGenerator {
 public:
  NoiseGenerator(const Covariance& cov, const GridSpec& grid, double dt);

  std::vector<double> sample(Rng& rng) const;
  /// Fills `out`; returns the largest |Im| of the inverted field relative to
  /// its largest |Re| (zero up to rounding after symmetrization).
  double sample_into(Rng& rng, std::vector<double>& out, std::vector<fft::cplx>& scratch) const;

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  /// fhat(0) was infinite and replaced by its average over the zero cell.
  bool zero_mode_regularized() const { return regularized_; }
  double zero_mode_value() const { return zero_mode_; }

 private:
  GridSpec grid_;
  double dt_;
  std::vector<double> amplitude_;
  bool regularized_ = false;
  double zero_mode_ = 0.0;
};

std::vector<double> sample_noise_increment(const Covariance& cov, const GridSpec& grid, double dt,
                                           Rng& rng);

}  // namespace shelab::spectral
