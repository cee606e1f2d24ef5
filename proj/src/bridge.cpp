#include "shelab/bridge.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shelab/error.hpp"
#include "shelab/fft.hpp"
#include "shelab/format.hpp"
#include "shelab/lattice.hpp"

namespace shelab::bridge {

using std::numbers::pi;

namespace {

constexpr double kRefinementTolerance = 1e-4;
constexpr double kVerdictSlack = 1e-6;
constexpr double kResolutionFloor = 1e-11;

double pow2_floor(double v) { return std::exp2(std::floor(std::log2(v))); }
double pow2_ceil(double v) { return std::exp2(std::ceil(std::log2(v))); }

std::size_t lattice_index(const GridSpec& g, double x, const char* what) {
  const double u = (x + g.half_extent) / g.spacing();
  const double r = std::round(u);
  require(std::abs(u - r) <= 1e-9 * std::max(1.0, std::abs(u)), ErrorCode::InvalidArgument,
          std::string(what) + " = " + fmt_double(x) + " is not a lattice point");
  require(r >= 0.0 && r < static_cast<double>(g.n), ErrorCode::Extent,
          std::string(what) + " = " + fmt_double(x) + " lies outside the grid");
  return static_cast<std::size_t>(r);
}

// Value of a lattice kernel at the offset (a - b) in lattice steps, periodically wrapped.
double kernel_at(const levy::KernelGrid& k, long offset) {
  const long n = static_cast<long>(k.grid.n);
  long idx = (offset + n / 2) % n;
  if (idx < 0) idx += n;
  return k.values[static_cast<std::size_t>(idx)];
}

struct Kernels {
  levy::KernelGrid s, rest, t;
};

Kernels kernels_for(const levy::LevyExponent& phi, double t, double s, const GridSpec& grid) {
  return {levy::transition_density(phi, s, grid), levy::transition_density(phi, t - s, grid),
          levy::transition_density(phi, t, grid)};
}

BridgeDensity quotient(const Kernels& k, const GridSpec& grid, double z, double x) {
  const long iz = static_cast<long>(lattice_index(grid, z, "start point"));
  const long ix = static_cast<long>(lattice_index(grid, x, "end point"));
  require(std::abs(x - z) < grid.half_extent, ErrorCode::Extent,
          "|x - z| must stay below the grid half-extent; the lattice is periodic");
  const double denom = kernel_at(k.t, ix - iz);
  require(denom >= 1e-300, ErrorCode::Underflow,
          "p_t(x - z) = " + fmt_double(denom) + " underflows; the bridge is degenerate");
  // Lattice kernels carry FFT rounding of order 1e-16 * peak; below that the
  // quotient is noise over noise.
  require(denom >= kResolutionFloor * k.t.peak(), ErrorCode::Underflow,
          "p_t(x - z) = " + fmt_double(denom) + " is below the lattice kernel resolution");
  BridgeDensity out;
  out.grid = grid;
  out.values.resize(grid.n);
  const double h = grid.spacing();
  for (std::size_t j = 0; j < grid.n; ++j) {
    const long jj = static_cast<long>(j);
    const double q = kernel_at(k.s, jj - iz) * kernel_at(k.rest, ix - jj) / denom;
    out.values[j] = q;
    out.mass += q * h;
    out.mean += grid.x(j) * q * h;
  }
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double d = grid.x(j) - out.mean;
    out.variance += d * d * out.values[j] * h;
  }
  return out;
}

double pair_energy(const spectral::Covariance& cov, const BridgeDensity& q1,
                   const BridgeDensity& q2) {
  const double h = q1.grid.spacing();
  if (cov.kind() == spectral::CovKind::White) {
    double acc = 0.0;
    for (std::size_t j = 0; j < q1.values.size(); ++j) acc += q1.values[j] * q2.values[j];
    return acc * h;
  }
  require(cov.has_function(), ErrorCode::Unsupported,
          "the bridge bound needs f as a function of the lag");
  const auto lags = lattice::correlate(q1.values, q2.values, h);
  return lattice::integrate_even_weight([&](double r) { return cov.f(r); }, lags, h);
}

double bridge_lhs(const levy::LevyExponent& phi, const spectral::Covariance& cov, double z1,
                  double z2, double x, double t, double s, const GridSpec& grid) {
  const auto k = kernels_for(phi, t, s, grid);
  const auto q1 = quotient(k, grid, z1, x);
  if (z1 == z2) return pair_energy(cov, q1, q1);
  return pair_energy(cov, q1, quotient(k, grid, z2, x));
}

}  // namespace

void BridgeSpec::validate() const {
  require(phi.dim() == 1, ErrorCode::Unsupported, "bridges are one-dimensional");
  require(std::isfinite(t) && t > 0.0, ErrorCode::InvalidArgument, "horizon t must be positive");
  require(std::isfinite(s) && s > 0.0 && s < t, ErrorCode::InvalidArgument,
          "interior time must satisfy 0 < s < t (got s=" + fmt_double(s) +
              ", t=" + fmt_double(t) + ")");
  require(std::isfinite(z) && std::isfinite(x), ErrorCode::InvalidArgument,
          "bridge endpoints must be finite");
}

GridSpec bridge_grid(const levy::LevyExponent& phi, double t, double s,
                     std::initializer_list<double> anchors) {
  require(t > 0.0 && s > 0.0 && s < t, ErrorCode::InvalidArgument,
          "bridge grid needs 0 < s < t");
  const double fine = levy::default_grid(phi, std::min(s, t - s)).spacing();
  const double h = pow2_floor(fine);
  double reach = 0.0;
  for (double a : anchors) reach = std::max(reach, std::abs(a));
  const double spread = levy::default_grid(phi, t, 1e-4).half_extent;
  const double half = pow2_ceil(reach + spread);
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half / h));
  GridSpec g{half, n, 1};
  g.validate();
  return g;
}

BridgeDensity bridge_density(const BridgeSpec& spec, const GridSpec& grid) {
  spec.validate();
  grid.validate();
  require(grid.dim == 1, ErrorCode::Unsupported, "bridge grids are one-dimensional");
  return quotient(kernels_for(spec.phi, spec.t, spec.s, grid), grid, spec.z, spec.x);
}

cplx bridge_char_fn(const BridgeSpec& spec, double xi) {
  spec.validate();
  const double r = spec.s / spec.t;
  const cplx expo = -spec.s * spec.phi.at((1.0 - r) * xi) - (spec.t - spec.s) * spec.phi.at(-r * xi);
  return std::exp(expo) * std::polar(1.0, xi * (spec.z + r * (spec.x - spec.z)));
}

namespace {

// Increment with E exp(i xi Y) = exp(-dt Phi(xi)).
double sample_increment(const levy::LevyExponent& phi, double dt, Rng& rng) {
  if (phi.a() == 2.0) return std::sqrt(2.0 * phi.scale() * dt) * rng.normal();
  // Chambers-Mallows-Stuck, symmetric case.
  const double a = phi.a();
  const double v = pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  double std_stable;
  if (a == 1.0) {
    std_stable = std::tan(v);
  } else {
    std_stable = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
                 std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
  }
  return std::pow(phi.scale() * dt, 1.0 / a) * std_stable;
}

}  // namespace

double sample_bridge(const BridgeSpec& spec, Rng& rng) {
  require(spec.phi.family() != levy::Family::Tabulated, ErrorCode::Unsupported,
          "bridge sampling needs exact increments; tabulated exponents have none");
  require(spec.phi.a() == 2.0 || spec.phi.theta() == 0.0, ErrorCode::Unsupported,
          "bridge sampling supports symmetric stable laws only");
  require(spec.phi.dim() == 1, ErrorCode::Unsupported, "bridges are one-dimensional");
  require(std::isfinite(spec.t) && spec.t > 0.0, ErrorCode::InvalidArgument,
          "horizon t must be positive");
  const double eps = 1e-9 * spec.t;
  if (spec.s <= eps) {
    if (spec.s != 0.0) spdlog::warn("bridge: s={} clamped to 0", spec.s);
    return spec.z;
  }
  if (spec.s >= spec.t - eps) {
    if (spec.s != spec.t) spdlog::warn("bridge: s={} clamped to t={}", spec.s, spec.t);
    return spec.x;
  }
  const double r = spec.s / spec.t;
  const double xs = sample_increment(spec.phi, spec.s, rng);
  const double inc = sample_increment(spec.phi, spec.t - spec.s, rng);
  return (1.0 - r) * xs - r * inc + spec.z + r * (spec.x - spec.z);
}

CfConsistency check_cf_consistency(const BridgeSpec& spec, const GridSpec& grid, double floor) {
  const auto q = bridge_density(spec, grid);
  const std::size_t n = grid.n;
  std::vector<fft::cplx> buf(n);
  for (std::size_t j = 0; j < n; ++j) buf[j] = q.values[j];
  // h sum_j q_j exp(i xi_k y_j) with y_j = -X + j h: exp(-i xi_k X) = (-1)^k.
  fft::backward(buf, n, 1);
  CfConsistency out;
  out.floor = floor;
  const double h = grid.spacing();
  for (std::size_t k = 0; k < n; ++k) {
    const cplx want = bridge_char_fn(spec, grid.xi(k));
    if (std::abs(want) < floor) continue;
    cplx got = buf[k] * h;
    if (grid.signed_index(k) % 2 != 0) got = -got;
    out.modulus_err = std::max(out.modulus_err, std::abs(std::abs(got) - std::abs(want)) / std::abs(want));
    out.phase_err = std::max(out.phase_err, std::abs(std::arg(got / want)));
    ++out.compared;
  }
  return out;
}

BridgeBound verify_bridge_bound(const levy::LevyExponent& phi, const spectral::Covariance& cov,
                                double z1, double z2, double x, double t, double s,
                                const quad::Options& opt) {
  BridgeSpec{phi, z1, x, t, s}.validate();
  require(cov.dim() == 1, ErrorCode::Unsupported, "bridge bound is checked in dimension 1");
  const GridSpec coarse = bridge_grid(phi, t, s, {z1, z2, x});
  const GridSpec fine{coarse.half_extent, 2 * coarse.n, 1};
  const double lhs_coarse = bridge_lhs(phi, cov, z1, z2, x, t, s, coarse);
  const double lhs = bridge_lhs(phi, cov, z1, z2, x, t, s, fine);
  require(std::abs(lhs - lhs_coarse) <= kRefinementTolerance * std::abs(lhs),
          ErrorCode::Nonconvergence,
          "bridge LHS changed by more than 1e-4 under refinement (" + fmt_double(lhs_coarse) +
              " vs " + fmt_double(lhs) + ")");

  const double r = s / t;
  auto integrand = [&](double xi) {
    const double e = -2.0 * s * phi.re_radial((1.0 - r) * xi) - 2.0 * (t - s) * phi.re_radial(r * xi);
    return std::exp(e) * cov.fhat(xi) / pi;  // (2 pi)^-1 over both half-lines
  };
  const double limit = std::min(phi.frequency_limit() / std::max(r, 1.0 - r), cov.spectral_limit());
  const auto rhs = quad::half_line(integrand, opt, limit);
  BridgeBound out;
  out.h = fine.spacing();
  out.lhs = lhs;
  if (rhs.status == quad::Status::Divergent) {
    out.rhs = std::numeric_limits<double>::infinity();
  } else {
    require(rhs.status == quad::Status::Finite, ErrorCode::Nonconvergence,
            "bridge RHS integral is inconclusive");
    out.rhs = rhs.value;
  }
  out.ratio = out.lhs / out.rhs;
  out.holds = out.lhs <= out.rhs * (1.0 + kVerdictSlack);
  return out;
}

std::vector<BridgeCase> standard_matrix() {
  const std::pair<double, double> times[] = {{0.5, 1.0}, {0.1, 1.0}, {0.9, 1.0}, {0.25, 0.5},
                                             {1.0, 2.0}};
  const double ends[][3] = {{0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-1.0, 2.0, 0.5}};
  std::vector<BridgeCase> out;
  for (const char* e : {"gaussian", "stable1.5"}) {
    for (const char* f : {"white", "riesz0.5"}) {
      for (auto [s, t] : times) {
        for (const auto& p : ends) out.push_back({e, f, p[0], p[1], p[2], t, s});
      }
    }
  }
  return out;
}

levy::LevyExponent case_exponent(const BridgeCase& c) {
  if (c.exponent == "gaussian") return levy::make_stable_exponent(2.0, 0.0, 0.5, 1);
  if (c.exponent == "stable1.5") return levy::make_stable_exponent(1.5, 0.0, 1.0, 1);
  throw Error(ErrorCode::InvalidArgument, "unknown bridge case exponent '" + c.exponent + "'");
}

spectral::Covariance case_covariance(const BridgeCase& c) {
  if (c.noise == "white") return spectral::Covariance::white(1);
  if (c.noise == "riesz0.5") return spectral::Covariance::riesz(0.5, 1);
  throw Error(ErrorCode::InvalidArgument, "unknown bridge case noise '" + c.noise + "'");
}

std::vector<BridgeCaseResult> run_matrix(const std::vector<BridgeCase>& cases,
                                         const quad::Options& opt) {
  std::vector<BridgeCaseResult> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    out.push_back({c, verify_bridge_bound(case_exponent(c), case_covariance(c), c.z1, c.z2, c.x,
                                          c.t, c.s, opt)});
  }
  return out;
}

void write_bridge_csv(std::ostream& out, const std::vector<BridgeCaseResult>& rows) {
  out << "exponent,noise,z1,z2,x,t,s,lhs,rhs,ratio,holds\n";
  for (const auto& r : rows) {
    out << r.c.exponent << ',' << r.c.noise << ',' << fmt_double(r.c.z1) << ','
        << fmt_double(r.c.z2) << ',' << fmt_double(r.c.x) << ',' << fmt_double(r.c.t) << ','
        << fmt_double(r.c.s) << ',' << fmt_double(r.bound.lhs) << ',' << fmt_double(r.bound.rhs)
        << ',' << fmt_double(r.bound.ratio) << ',' << (r.bound.holds ? "true" : "false") << '\n';
  }
}

}  // namespace shelab::bridge
