#include "shelab/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <unordered_map>

#include "shelab/error.hpp"
#include "shelab/format.hpp"

namespace shelab::bounds {

using std::numbers::pi;

void BoundParams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(ok(L_b) && ok(L_sigma), ErrorCode::InvalidArgument,
          "Lipschitz constants must be finite and nonnegative");
  require(std::isfinite(b0) && std::isfinite(sigma0), ErrorCode::InvalidArgument,
          "b(0) and sigma(0) must be finite");
  require(p >= 2, ErrorCode::InvalidArgument, "moment order p must be an integer >= 2");
  require(d >= 1 && d <= 3, ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
}

namespace {

const double kInf = std::numeric_limits<double>::infinity();
constexpr double kTabulatedTolerance = 1e-7;

// Homogeneous structure of the integrand, when both Re Phi and fhat are powers.
struct Scaling {
  bool phi_homogeneous = false;
  double a = 0.0;
  bool closed = false;  // H(k) = h1 * k^-q
  double q = 0.0;
  double h1 = 0.0;
};

double band_limit(const levy::LevyExponent& phi, const spectral::Covariance& cov, double stretch) {
  return std::min(phi.frequency_limit() / stretch, cov.spectral_limit());
}

// H(k) = int exp(-2 k Re Phi(xi)) fhat(xi) dxi.
quad::HalfLine h_integral(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                          double k, const quad::Options& opt) {
  quad::Options o = opt;
  if (auto a = phi.homogeneity()) {
    // exp(-2k Re Phi) lives on |xi| < k^(-1/a); fhat may be narrower still.
    o.first_segment = std::min(1.0, std::pow(1.0 / (k * phi.re_radial(1.0)), 1.0 / *a));
  }
  return spectral::radial_integral(
      [&](double r) { return std::exp(-2.0 * k * phi.re_radial(r)) * cov.fhat(r); }, cov.dim(), o,
      band_limit(phi, cov, 1.0));
}

Scaling scaling_of(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                   const quad::Options& opt) {
  Scaling sc;
  const auto a = phi.homogeneity();
  if (!a) return sc;
  sc.phi_homogeneous = true;
  sc.a = *a;
  const auto delta = cov.spectral_homogeneity();
  if (!delta) return sc;
  sc.closed = true;
  sc.q = (*delta + cov.dim()) / *a;
  const auto h = h_integral(phi, cov, 1.0, opt);
  if (h.status == quad::Status::Divergent) {
    sc.h1 = kInf;
  } else {
    require(h.status == quad::Status::Finite, ErrorCode::Nonconvergence,
            "spectral integral H(1) is inconclusive");
    sc.h1 = h.value;
  }
  return sc;
}

// int_0^t g(s, t - s) ds; g receives both s and u = t - s accurately so the
// endpoint singularities keep full relative precision.
double outer_integral(const std::function<double(double, double)>& g, double t,
                      const quad::Options& opt) {
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  auto two_sided = [&](double s, double xc) {
    // xc is the signed distance to the nearer endpoint
    const double lo = xc < 0.0 ? -xc : s;
    const double hi = xc > 0.0 ? xc : t - s;
    const double v = g(lo, hi);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  double v = 0.0;
  try {
    v = integrator.integrate(two_sided, 0.0, t, opt.rel_tol, &err, &l1, &levels);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Nonconvergence, std::string("time integral failed: ") + e.what());
  }
  require(std::isfinite(v) && err <= 1e-6 * std::abs(v) + 1e-300, ErrorCode::Nonconvergence,
          "time integral did not converge (error estimate " + fmt_double(err) + ")");
  return v;
}

// s (1 - s/t)^a + (t - s)(s/t)^a with u = t - s
double kappa(double s, double u, double t, double a) {
  return s * std::pow(u / t, a) + u * std::pow(s / t, a);
}

double upsilon_at_impl(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                       double beta, double t, const Scaling& sc, const quad::Options& opt) {
  if (sc.closed) {
    require(std::isfinite(sc.h1) && sc.q < 1.0, ErrorCode::Divergent,
            "Upsilon diverges: the time integrand is not integrable at the endpoints");
    auto g = [&](double s, double u) {
      const double k = kappa(s, u, t, sc.a);
      if (k <= 0.0) return 0.0;
      return sc.h1 * std::pow(k, -sc.q) * std::exp(-2.0 * beta * u);
    };
    return outer_integral(g, t, opt);
  }
  auto inner = [&](double s, double u) {
    quad::HalfLine h;
    if (sc.phi_homogeneous) {
      const double k = kappa(s, u, t, sc.a);
      if (k <= 0.0) return 0.0;
      h = h_integral(phi, cov, k, opt);
    } else {
      // Tabulated exponents are piecewise linear: adaptive rules stall on the
      // kinks below ~1e-7, far under the interpolation error itself.
      quad::Options o = opt;
      o.rel_tol = std::max(opt.rel_tol, kTabulatedTolerance);
      const double r = s / t;
      h = spectral::radial_integral(
          [&](double rho) {
            return std::exp(-2.0 * s * phi.re_radial(u / t * rho) -
                            2.0 * u * phi.re_radial(r * rho)) *
                   cov.fhat(rho);
          },
          cov.dim(), o, band_limit(phi, cov, std::max(r, 1.0 - r)));
    }
    require(h.status != quad::Status::Divergent, ErrorCode::Divergent,
            "Upsilon diverges: spectral integral fails the tail test at s=" + fmt_double(s) +
                ", t=" + fmt_double(t));
    require(h.status == quad::Status::Finite, ErrorCode::Nonconvergence,
            "spectral integral inconclusive at s=" + fmt_double(s));
    return h.value * std::exp(-2.0 * beta * u);
  };
  if (sc.phi_homogeneous) return outer_integral(inner, t, opt);
  quad::Options o = opt;
  o.rel_tol = std::max(opt.rel_tol, kTabulatedTolerance);
  return outer_integral(inner, t, o);
}

// lim_{t -> inf}: int_0^inf H(u) exp(-2 beta u) du (homogeneous Re Phi with a > 1).
double reduction_limit(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                       double beta, const Scaling& sc, const quad::Options& opt) {
  if (sc.closed) return sc.h1 * std::tgamma(1.0 - sc.q) * std::pow(2.0 * beta, sc.q - 1.0);
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const auto h = h_integral(phi, cov, u, opt);
    require(h.status == quad::Status::Finite, ErrorCode::Divergent,
            "Upsilon diverges: H(u) is not finite at u=" + fmt_double(u));
    return h.value * std::exp(-2.0 * beta * u);
  };
  quad::Options o = opt;
  o.first_segment = 1.0 / beta;
  const auto r = quad::half_line(g, o);
  require(r.status == quad::Status::Finite, ErrorCode::Nonconvergence,
          "t -> infinity reduction did not converge");
  return r.value;
}

void check_dims(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta) {
  require(std::isfinite(beta) && beta > 0.0, ErrorCode::InvalidArgument, "beta must be positive");
  require(phi.dim() == cov.dim(), ErrorCode::InvalidArgument,
          "exponent and covariance dimensions differ");
}

}  // namespace

double upsilon_at(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                  double t, const quad::Options& opt) {
  check_dims(phi, cov, beta);
  require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidArgument, "t must be positive");
  return upsilon_at_impl(phi, cov, beta, t, scaling_of(phi, cov, opt), opt);
}

UpsilonResult upsilon(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                      const UpsilonOptions& opt) {
  check_dims(phi, cov, beta);
  require(opt.grid_points >= 3 && opt.t_min > 0.0 && opt.t_max > opt.t_min,
          ErrorCode::InvalidArgument, "invalid Upsilon t-grid");
  UpsilonResult out;
  const Scaling sc = scaling_of(phi, cov, opt.quad);
  if (sc.closed && (!std::isfinite(sc.h1) || sc.q >= 1.0)) {
    out.status = quad::Status::Divergent;
    out.value = kInf;
    return out;
  }
  auto eval = [&](double t) { return upsilon_at_impl(phi, cov, beta, t, sc, opt.quad); };
  try {
    const double lo = std::log(opt.t_min), hi = std::log(opt.t_max);
    std::size_t best = 0;
    for (int i = 0; i < opt.grid_points; ++i) {
      const double t = std::exp(lo + (hi - lo) * i / (opt.grid_points - 1));
      out.grid.push_back({t, eval(t)});
      if (out.grid.back().value > out.grid[best].value) best = out.grid.size() - 1;
    }
    out.value = out.grid[best].value;
    out.t_star = out.grid[best].t;
    const bool at_edge = best + 1 == out.grid.size();
    if (opt.refine) {
      // Golden-section search in log t over the cells around the grid maximum.
      double a = std::log(out.grid[best == 0 ? 0 : best - 1].t);
      double b = std::log(out.grid[std::min(best + 1, out.grid.size() - 1)].t);
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = b - g * (b - a), d = a + g * (b - a);
      double fc = eval(std::exp(c)), fd = eval(std::exp(d));
      while (b - a > 1e-7) {
        if (fc > fd) {
          b = d, d = c, fd = fc;
          c = b - g * (b - a);
          fc = eval(std::exp(c));
        } else {
          a = c, c = d, fc = fd;
          d = a + g * (b - a);
          fd = eval(std::exp(d));
        }
      }
      const double f = std::max(fc, fd);
      if (f > out.value) {
        out.value = f;
        out.t_star = std::exp(fc > fd ? c : d);
      }
    }
    out.limit = std::numeric_limits<double>::quiet_NaN();
    if (sc.phi_homogeneous && sc.a > 1.0) {
      out.limit = reduction_limit(phi, cov, beta, sc, opt.quad);
      if (out.limit > out.value) {
        out.value = out.limit;
        out.t_star = kInf;
      }
    }
    if (at_edge && !(out.limit >= out.grid.back().value)) {
      out.sup_not_localized = true;
      spdlog::warn("upsilon: grid maximum at t_max={} and still increasing; sup not localized",
                   opt.t_max);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Divergent) throw;
    out.status = quad::Status::Divergent;
    out.value = kInf;
  }
  return out;
}

TildeResult upsilon_tilde(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                          double beta, const quad::Options& opt) {
  check_dims(phi, cov, beta);
  quad::Options o = opt;
  if (auto a = phi.homogeneity()) o.first_segment = std::pow(beta / phi.re_radial(1.0), 1.0 / *a);
  const auto r = spectral::radial_integral(
      [&](double rho) { return cov.fhat(rho) / (beta + phi.re_radial(rho)); }, cov.dim(), o,
      band_limit(phi, cov, 1.0));
  TildeResult out;
  out.status = r.status;
  out.tail_power = r.tail_power;
  out.value = r.status == quad::Status::Divergent ? kInf : r.value;
  return out;
}

double tau_const(const BoundParams& params) {
  params.validate();
  require(params.L_sigma > 0.0 || params.sigma0 == 0.0, ErrorCode::IllPosed,
          "sigma(0) != 0 with L_sigma = 0: constant sigma is outside the bound's hypotheses");
  require(params.L_b > 0.0 || params.b0 == 0.0, ErrorCode::IllPosed,
          "b(0) != 0 with L_b = 0: constant drift is outside the bound's hypotheses");
  double tau = 0.0;
  if (params.L_b > 0.0) tau = std::max(tau, std::abs(params.b0) / params.L_b);
  if (params.L_sigma > 0.0) tau = std::max(tau, std::abs(params.sigma0) / params.L_sigma);
  return tau;
}

std::vector<double> hermite_zeros(int p) {
  require(p >= 1, ErrorCode::InvalidArgument, "Hermite degree must be at least 1");
  require(p <= 200, ErrorCode::SizeLimit, "Hermite degree above 200 is not supported");
  if (p == 1) return {0.0};
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd off(p - 1);
  for (int k = 1; k < p; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  std::vector<double> z(solver.eigenvalues().data(), solver.eigenvalues().data() + p);
  // Newton on psi_k = He_k / sqrt(k!), which stays O(1) near the zeros:
  // psi_{k+1} = (x psi_k - sqrt(k) psi_{k-1}) / sqrt(k + 1), He_p' / He_p = sqrt(p) psi_{p-1} / psi_p.
  for (double& x : z) {
    for (int it = 0; it < 3; ++it) {
      double prev = 0.0, cur = 1.0;
      for (int k = 0; k < p; ++k) {
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
      }
      if (prev == 0.0) break;
      const double step = cur / (std::sqrt(static_cast<double>(p)) * prev);
      if (!std::isfinite(step) || std::abs(step) > 1e-6 * (1.0 + std::abs(x))) break;
      x -= step;
    }
  }
  return z;
}

double hermite_largest_zero(int p) { return hermite_zeros(p).back(); }

// ---------------------------------------------------------------------------
// B(beta, p) and its cache

namespace {

struct CacheEntry {
  double upsilon;
  double tilde;
};

std::shared_mutex cache_mutex;
std::unordered_map<std::string, CacheEntry>& cache() {
  static std::unordered_map<std::string, CacheEntry> c;
  return c;
}

std::string cache_key(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                      const UpsilonOptions& opt) {
  return phi.fingerprint() + "|" + cov.fingerprint() + "|" + fmt_double(beta) + "|" +
         fmt_double(opt.t_min) + "," + fmt_double(opt.t_max) + "," +
         std::to_string(opt.grid_points) + "," + (opt.refine ? "r" : "n") + "," +
         fmt_double(opt.quad.rel_tol);
}

CacheEntry integrals(const levy::LevyExponent& phi, const spectral::Covariance& cov, double beta,
                     const UpsilonOptions& opt) {
  const std::string key = cache_key(phi, cov, beta, opt);
  {
    std::shared_lock lock(cache_mutex);
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  const auto tilde = upsilon_tilde(phi, cov, beta, opt.quad);
  require(tilde.status != quad::Status::Divergent, ErrorCode::Divergent,
          "Dalang integral diverges at beta=" + fmt_double(beta));
  require(tilde.status == quad::Status::Finite, ErrorCode::Nonconvergence,
          "Dalang integral is inconclusive at beta=" + fmt_double(beta));
  const auto ups = upsilon(phi, cov, beta, opt);
  require(ups.status == quad::Status::Finite, ErrorCode::Divergent,
          "Upsilon diverges at beta=" + fmt_double(beta));
  const CacheEntry e{ups.value, tilde.value};
  std::unique_lock lock(cache_mutex);
  cache().emplace(key, e);  // concurrent writers store identical values
  return e;
}

}  // namespace

std::size_t cache_size() {
  std::shared_lock lock(cache_mutex);
  return cache().size();
}

void clear_cache() {
  std::unique_lock lock(cache_mutex);
  cache().clear();
}

BoundValue bound_constant(double beta, const BoundParams& params, const levy::LevyExponent& phi,
                          const spectral::Covariance& cov, const UpsilonOptions& opt) {
  params.validate();
  check_dims(phi, cov, beta);
  require(params.d == phi.dim(), ErrorCode::InvalidArgument,
          "bound parameters and exponent disagree on the dimension");
  BoundValue out;
  out.z_p = hermite_largest_zero(params.p);
  out.B = params.L_b / beta;
  if (params.L_sigma > 0.0) {
    const auto e = integrals(phi, cov, beta, opt);
    out.upsilon = e.upsilon;
    out.upsilon_tilde = e.tilde;
    out.B += out.z_p * params.L_sigma / std::pow(2.0 * pi, params.d / 2.0) *
             (std::sqrt(e.tilde / 2.0) + std::sqrt(e.upsilon));
  }
  return out;
}

CriticalBeta critical_beta(const BoundParams& params, const levy::LevyExponent& phi,
                           const spectral::Covariance& cov, double tol, double beta_cap,
                           const UpsilonOptions& opt) {
  require(tol > 0.0 && tol < 1.0, ErrorCode::InvalidArgument, "tolerance must lie in (0, 1)");
  require(beta_cap > 1e-8, ErrorCode::InvalidArgument, "beta cap must be positive");
  CriticalBeta out;
  auto B = [&](double beta) {
    ++out.evaluations;
    return bound_constant(beta, params, phi, cov, opt).B;
  };
  constexpr double kFloor = 1e-8;
  double lo, hi;
  double beta = std::min(1.0, beta_cap);
  if (B(beta) < 1.0) {
    hi = beta;
    for (;;) {
      const double next = hi / 2.0;
      if (next < kFloor) {
        if (B(kFloor) < 1.0) {
          out.beta = 0.0;
          out.upper = kFloor;
          out.B_at = B(kFloor);
          return out;
        }
        lo = kFloor;
        break;
      }
      if (B(next) >= 1.0) {
        lo = next;
        break;
      }
      hi = next;
    }
  } else {
    lo = beta;
    for (;;) {
      const double next = std::min(2.0 * lo, beta_cap);
      if (B(next) < 1.0) {
        hi = next;
        break;
      }
      require(next < beta_cap, ErrorCode::NoCrossing,
              "B(beta, p) >= 1 up to the cap beta=" + fmt_double(beta_cap));
      lo = next;
    }
  }
  while (hi / lo - 1.0 > tol) {
    const double mid = std::sqrt(lo * hi);
    if (B(mid) < 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.lower = lo;
  out.upper = hi;
  out.beta = std::sqrt(lo * hi);
  out.B_at = B(out.beta);
  return out;
}

std::vector<BoundRow> bound_table(const std::vector<double>& betas, const BoundParams& params,
                                  const levy::LevyExponent& phi, const spectral::Covariance& cov,
                                  const UpsilonOptions& opt) {
  std::vector<BoundRow> rows;
  for (double b : betas) rows.push_back({b, bound_constant(b, params, phi, cov, opt), params.p});
  return rows;
}

void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
  out << "beta,upsilon,upsilon_tilde,B,p,z_p\n";
  for (const auto& r : rows) {
    out << fmt_double(r.beta) << ',' << fmt_double(r.value.upsilon) << ','
        << fmt_double(r.value.upsilon_tilde) << ',' << fmt_double(r.value.B) << ',' << r.p << ','
        << fmt_double(r.value.z_p) << '\n';
  }
}

}  // namespace shelab::bounds
