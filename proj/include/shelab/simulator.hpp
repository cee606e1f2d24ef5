#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "shelab/bounds.hpp"
#include "shelab/grid.hpp"
#include "shelab/levy.hpp"
#include "shelab/rng.hpp"
#include "shelab/spectral.hpp"

namespace shelab::sim {

/// Lipschitz coefficient u -> c(u) for the drift b or the diffusion sigma.
class Coefficient {
 public:
  enum class Kind { Zero, Affine, Tabulated };

  static Coefficient zero();
  /// c0 + c1 u.
  static Coefficient affine(double c0, double c1);
  /// Linear interpolation on an increasing grid, constant beyond its ends.
  /// The declared constant must dominate every tabulated slope.
  static Coefficient tabulated(std::vector<double> u, std::vector<double> values,
                               double declared_lipschitz);

  Kind kind() const { return kind_; }
  double operator()(double u) const;
  double lipschitz() const;
  double c0() const { return c0_; }
  double c1() const { return c1_; }
  const std::vector<double>& grid() const { return u_; }
  const std::vector<double>& values() const { return v_; }
  bool is_zero() const { return kind_ == Kind::Zero; }

 private:
  Kind kind_ = Kind::Zero;
  double c0_ = 0.0;
  double c1_ = 0.0;
  double declared_ = 0.0;
  std::vector<double> u_, v_;
};

const char* to_string(Coefficient::Kind k) noexcept;

struct SheConfig {
  SheConfig(levy::LevyExponent phi, spectral::Covariance cov, levy::InitialMeasure mu)
      : phi(std::move(phi)), cov(std::move(cov)), mu(std::move(mu)) {}

  levy::LevyExponent phi;
  spectral::Covariance cov;
  levy::InitialMeasure mu;
  Coefficient b = Coefficient::zero();
  Coefficient sigma = Coefficient::zero();
  GridSpec grid{8.0, 128, 1};
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  /// Steps between recorded times; 0 picks the smallest stride giving at most 200 intervals.
  std::size_t record_stride = 0;
  /// Worker threads for ensembles (0: hardware concurrency).
  unsigned threads = 0;

  /// dt <= dx^a / (4 C): the one-step smoothing radius resolves the lattice.
  double dt_ceiling() const;
  std::size_t steps() const;
  std::size_t stride() const;
  void validate() const;
};

struct Trajectory {
  GridSpec grid;
  std::vector<double> times;
  /// u(t_k, x_j) at the recorded times.
  std::vector<std::vector<double>> fields;
  /// (p_{t_k} * mu)(x_j), the deterministic flow on the same lattice.
  std::vector<std::vector<double>> reference;
  std::uint64_t seed = 0;
};

/// Exponential integrator for the mild equation on the periodic lattice:
/// uhat <- exp(-dt Phi) (uhat + F[b(u) dt + sigma(u) dW]). The noise increment
/// of step k is drawn after u(t_k) is known and enters only u(t_{k+1}).
Trajectory solve_mild(const SheConfig& config, Rng& rng);

struct PicardResult {
  std::vector<double> times;
  /// Iterates u^0 .. u^n_max of the first path (seed stream 0) at recorded times.
  std::vector<std::vector<std::vector<double>>> iterates;
  /// gaps[n - 1] = ||(u^n - u^{n-1}) / (tau + p * mu)||_{beta,p}, n = 1 .. n_max.
  std::vector<double> gaps;
  /// ratios[n - 2] = gaps[n - 1] / gaps[n - 2], n = 2 .. n_max.
  std::vector<double> ratios;
  double tau = 0.0;
  std::size_t paths = 0;
};

/// Picard iteration with each path's noise frozen across iterates. The
/// weighted norm is estimated over `paths` independent noise paths, with the
/// time sup taken over recorded times.
PicardResult picard_iterate(const SheConfig& config, int n_max, double beta, int p,
                            std::size_t paths);

struct MomentCurve {
  std::vector<double> times;
  /// sup_x (E |u / (tau + p * mu)|^p)^(1/p), x over lattice points where
  /// tau + p_t * mu is at least 1e-10 of its maximum.
  std::vector<double> values;
  /// Bootstrap standard error at the maximizing x.
  std::vector<double> stderr_;
  std::vector<double> argmax_x;
  /// Per time, per path |u / (tau + p * mu)|^p at argmax_x (may be empty).
  std::vector<std::vector<double>> samples;
  std::size_t M = 0;
  int p = 2;
  double tau = 0.0;
  std::uint64_t seed = 0;
};

/// M independent paths with seeds stream_seed(config.seed, i). Times exclude t = 0.
MomentCurve estimate_moments(const SheConfig& config, int p, std::size_t M);

/// max over the sampled times of exp(-beta t) value(t); the continuum sup over
/// t is approximated on the curve's time grid.
double weighted_norm(const MomentCurve& curve, double beta);

struct GammaEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of the 95% interval.
  double ci = 0.0;
  std::size_t points = 0;
  /// ci from a path bootstrap (true) or from propagated stderr (false).
  bool path_bootstrap = false;
};

/// Least-squares slope of log(value) against t over [t_lo, t_hi]: a finite
/// horizon proxy for the limsup growth rate.
GammaEstimate estimate_gamma_bar(const MomentCurve& curve, double t_lo, double t_hi);
/// Window [T/2, T] with T the last curve time.
GammaEstimate estimate_gamma_bar(const MomentCurve& curve);

bounds::BoundParams bound_params(const SheConfig& config, int p);

struct MomentVerdict {
  double gamma_hat = 0.0;
  double ci = 0.0;
  double beta_star = 0.0;
  double tol = 0.0;
  bool holds = false;
  bounds::CriticalBeta critical;
  GammaEstimate gamma;
  MomentCurve curve;
};

/// gamma_hat <= beta_star + ci + tol.
MomentVerdict verify_moment_bound(const SheConfig& config, int p, std::size_t M, double tol,
                                  const bounds::UpsilonOptions& opt = {});

/// t,x,u,reference
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// t,value,stderr,M,p
void write_moment_csv(std::ostream& out, const MomentCurve& curve);

}  // namespace shelab::sim
