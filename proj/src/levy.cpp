#include "shelab/levy.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shelab/error.hpp"
#include "shelab/fft.hpp"
#include "shelab/format.hpp"

namespace shelab::levy {

using std::numbers::pi;

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::BrownianHalfLaplacian: return "brownian";
    case Family::StableSkewed: return "stable";
    case Family::Tabulated: return "tabulated";
  }
  return "unknown";
}

const char* to_string(InitialMeasure::Kind k) noexcept {
  switch (k) {
    case InitialMeasure::Kind::Dirac: return "dirac";
    case InitialMeasure::Kind::Lebesgue: return "lebesgue";
    case InitialMeasure::Kind::AtomMix: return "atoms";
    case InitialMeasure::Kind::DensityGrid: return "density";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// LevyExponent

LevyExponent LevyExponent::stable(double a, double theta, double scale, int dim) {
  require(std::isfinite(a) && a > 1.0 && a <= 2.0, ErrorCode::InvalidArgument,
          "stability index a must lie in (1, 2]");
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::InvalidArgument,
          "exponent scale must be positive");
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be at least 1");
  LevyExponent e;
  e.a_ = a;
  e.scale_ = scale;
  e.dim_ = dim;
  if (a == 2.0) {
    // Skewness has no effect on a Gaussian exponent.
    e.family_ = Family::BrownianHalfLaplacian;
    e.theta_ = 0.0;
    return e;
  }
  require(std::isfinite(theta) && std::abs(theta) < 2.0 - a, ErrorCode::InvalidArgument,
          "skewness must satisfy |theta| < 2 - a");
  require(dim == 1 || theta == 0.0, ErrorCode::Unsupported,
          "skewed stable exponents are only supported in dimension 1");
  e.family_ = Family::StableSkewed;
  e.theta_ = theta;
  return e;
}

LevyExponent LevyExponent::tabulated(std::vector<double> xi, std::vector<cplx> phi) {
  require(xi.size() >= 2 && xi.size() == phi.size(), ErrorCode::InvalidArgument,
          "tabulated exponent needs matching lattices of at least two points");
  require(xi.front() == 0.0, ErrorCode::InvalidArgument,
          "tabulated exponent lattice must start at xi = 0");
  require(std::abs(phi.front()) == 0.0, ErrorCode::InvalidArgument,
          "tabulated exponent must vanish at xi = 0");
  for (std::size_t i = 1; i < xi.size(); ++i) {
    require(xi[i] > xi[i - 1], ErrorCode::InvalidArgument,
            "tabulated exponent lattice must be strictly increasing");
  }
  for (const auto& v : phi) {
    require(std::isfinite(v.real()) && std::isfinite(v.imag()) && v.real() >= 0.0,
            ErrorCode::InvalidArgument, "tabulated exponent needs finite values with Re >= 0");
  }
  LevyExponent e;
  e.family_ = Family::Tabulated;
  e.a_ = std::numeric_limits<double>::quiet_NaN();
  e.scale_ = std::numeric_limits<double>::quiet_NaN();
  e.dim_ = 1;
  e.tab_xi_ = std::move(xi);
  e.tab_phi_ = std::move(phi);
  return e;
}

cplx LevyExponent::eval_1d(double xi) const {
  if (xi == 0.0) return {0.0, 0.0};
  const double r = std::abs(xi);
  switch (family_) {
    case Family::BrownianHalfLaplacian:
      return {scale_ * r * r, 0.0};
    case Family::StableSkewed: {
      const double mag = scale_ * std::pow(r, a_);
      const double sgn = xi > 0.0 ? 1.0 : -1.0;
      return {mag * std::cos(pi * theta_ / 2.0), -mag * std::sin(pi * theta_ / 2.0) * sgn};
    }
    case Family::Tabulated: {
      if (r > tab_xi_.back()) {
        throw Error(ErrorCode::Extent,
                    "frequency " + fmt_double(xi) + " lies beyond the tabulated lattice");
      }
      auto it = std::upper_bound(tab_xi_.begin(), tab_xi_.end(), r);
      std::size_t hi = static_cast<std::size_t>(it - tab_xi_.begin());
      if (hi >= tab_xi_.size()) hi = tab_xi_.size() - 1;
      const std::size_t lo = hi - 1;
      const double w = (r - tab_xi_[lo]) / (tab_xi_[hi] - tab_xi_[lo]);
      const cplx v = (1.0 - w) * tab_phi_[lo] + w * tab_phi_[hi];
      return xi > 0.0 ? v : std::conj(v);
    }
  }
  return {0.0, 0.0};
}

cplx LevyExponent::operator()(std::span<const double> xi) const {
  require(static_cast<int>(xi.size()) == dim_, ErrorCode::InvalidArgument,
          "frequency vector dimension does not match the exponent");
  if (dim_ == 1) return eval_1d(xi[0]);
  // Multi-dimensional exponents are isotropic (symmetric stable only).
  double r2 = 0.0;
  for (double v : xi) r2 += v * v;
  return eval_1d(std::sqrt(r2));
}

cplx LevyExponent::at(double xi) const {
  require(dim_ == 1, ErrorCode::InvalidArgument, "scalar evaluation needs dim = 1");
  return eval_1d(xi);
}

double LevyExponent::re_radial(double r) const { return eval_1d(r).real(); }

std::optional<double> LevyExponent::homogeneity() const {
  if (family_ == Family::Tabulated) return std::nullopt;
  return a_;
}

double LevyExponent::frequency_limit() const {
  return family_ == Family::Tabulated ? tab_xi_.back()
                                      : std::numeric_limits<double>::infinity();
}

std::string LevyExponent::convention() const {
  if (family_ == Family::Tabulated) {
    return "tabulated Phi on [0," + fmt_double(tab_xi_.back()) +
           "], linear interpolation, Phi(-xi)=conj Phi(xi); E exp(i xi X_t)=exp(-t Phi(xi))";
  }
  return "Phi(xi)=C|xi|^a[cos(pi theta/2)-i sin(pi theta/2)sgn(xi)]; "
         "E exp(i xi X_t)=exp(-t Phi(xi))";
}

std::string LevyExponent::fingerprint() const {
  std::ostringstream os;
  os << to_string(family_) << ";d=" << dim_;
  if (family_ == Family::Tabulated) {
    for (std::size_t i = 0; i < tab_xi_.size(); ++i) {
      os << ';' << fmt_double(tab_xi_[i]) << ':' << fmt_double(tab_phi_[i].real()) << ','
         << fmt_double(tab_phi_[i].imag());
    }
  } else {
    os << ";a=" << fmt_double(a_) << ";theta=" << fmt_double(theta_)
       << ";C=" << fmt_double(scale_);
  }
  return os.str();
}

LevyExponent make_stable_exponent(double a, double theta, double scale, int dim) {
  return LevyExponent::stable(a, theta, scale, dim);
}

cplx evaluate_exponent(const LevyExponent& phi, std::span<const double> xi) {
  return phi(xi);
}

// ---------------------------------------------------------------------------
// InitialMeasure

InitialMeasure InitialMeasure::dirac(double location) {
  require(std::isfinite(location), ErrorCode::InvalidArgument, "Dirac location must be finite");
  InitialMeasure m;
  m.kind_ = Kind::Dirac;
  m.atoms_ = {{location, 1.0}};
  return m;
}

InitialMeasure InitialMeasure::lebesgue() {
  InitialMeasure m;
  m.kind_ = Kind::Lebesgue;
  return m;
}

InitialMeasure InitialMeasure::atoms(std::vector<Atom> atoms) {
  require(!atoms.empty(), ErrorCode::InvalidArgument, "atomic measure needs at least one atom");
  for (const auto& a : atoms) {
    require(std::isfinite(a.location), ErrorCode::InvalidArgument, "atom location must be finite");
    require(std::isfinite(a.weight) && a.weight > 0.0, ErrorCode::InvalidArgument,
            "atom weights must be strictly positive");
  }
  InitialMeasure m;
  m.kind_ = Kind::AtomMix;
  m.atoms_ = std::move(atoms);
  return m;
}

InitialMeasure InitialMeasure::density(GridSpec grid, std::vector<double> values) {
  grid.validate();
  require(grid.dim == 1, ErrorCode::Unsupported, "density measures are one-dimensional");
  require(values.size() == grid.n, ErrorCode::InvalidArgument,
          "density values do not match the grid size");
  double mass = 0.0;
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
            "density values must be finite and nonnegative");
    mass += v;
  }
  require(mass > 0.0, ErrorCode::InvalidArgument, "measure must have positive mass");
  InitialMeasure m;
  m.kind_ = Kind::DensityGrid;
  m.grid_ = grid;
  m.values_ = std::move(values);
  return m;
}

double InitialMeasure::total_mass() const {
  switch (kind_) {
    case Kind::Lebesgue: return std::numeric_limits<double>::infinity();
    case Kind::Dirac:
    case Kind::AtomMix: {
      double m = 0.0;
      for (const auto& a : atoms_) m += a.weight;
      return m;
    }
    case Kind::DensityGrid:
      return std::accumulate(values_.begin(), values_.end(), 0.0) * grid_.spacing();
  }
  return 0.0;
}

cplx InitialMeasure::fourier(double xi) const {
  switch (kind_) {
    case Kind::Lebesgue:
      throw Error(ErrorCode::Unsupported, "the Lebesgue measure has no pointwise Fourier transform");
    case Kind::Dirac:
    case Kind::AtomMix: {
      cplx acc{0.0, 0.0};
      for (const auto& a : atoms_) acc += a.weight * std::polar(1.0, -xi * a.location);
      return acc;
    }
    case Kind::DensityGrid: {
      cplx acc{0.0, 0.0};
      for (std::size_t j = 0; j < grid_.n; ++j) {
        acc += values_[j] * std::polar(1.0, -xi * grid_.x(j));
      }
      return acc * grid_.spacing();
    }
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// KernelGrid and transition densities

double KernelGrid::mass() const {
  const double cell = std::pow(grid.spacing(), grid.dim);
  return std::accumulate(values.begin(), values.end(), 0.0) * cell;
}

double KernelGrid::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

namespace {

constexpr double kAliasFloor = 1e-12;
constexpr double kNegativeTolerance = 1e-9;
constexpr double kMassTolerance = 1e-6;

// Multi-index of a flat row-major position on an n^dim cube.
void unflatten(std::size_t flat, std::size_t n, int dim, std::vector<std::size_t>& idx) {
  idx.resize(static_cast<std::size_t>(dim));
  for (int a = dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = flat % n;
    flat /= n;
  }
}

double effective_scale(const LevyExponent& phi) {
  return phi.re_radial(1.0);
}

quad::Options density_options(const LevyExponent& phi, double t, const quad::Options& base) {
  quad::Options opt = base;
  if (auto a = phi.homogeneity()) {
    opt.first_segment = std::pow(1.0 / (t * effective_scale(phi)), 1.0 / *a);
  }
  return opt;
}

}  // namespace

std::vector<IntegrabilityRow> check_integrability(const LevyExponent& phi,
                                                  std::span<const double> times,
                                                  const quad::Options& opt) {
  require(!times.empty(), ErrorCode::InvalidArgument, "time list must be nonempty");
  const int d = phi.dim();
  const double sphere = 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
  std::vector<IntegrabilityRow> rows;
  rows.reserve(times.size());
  for (double t : times) {
    require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidArgument, "times must be positive");
    auto g = [&](double r) {
      return sphere * std::pow(r, d - 1) * std::exp(-t * phi.re_radial(r));
    };
    const auto res = quad::half_line(g, density_options(phi, t, opt), phi.frequency_limit());
    rows.push_back({t, res.status, res.value});
  }
  return rows;
}

GridSpec default_grid(const LevyExponent& phi, double t, double mass_budget) {
  require(t > 0.0, ErrorCode::InvalidArgument, "time must be positive");
  require(mass_budget > 0.0 && mass_budget < 1.0, ErrorCode::InvalidArgument,
          "mass budget must lie in (0, 1)");
  const double decay = -std::log(kAliasFloor);
  double xi_max = 0.0;
  double half_extent = 0.0;
  if (auto a = phi.homogeneity()) {
    const double c = effective_scale(phi);
    xi_max = std::pow(decay / (c * t), 1.0 / *a);
    const double core = 8.0 * std::pow(phi.scale() * t, 1.0 / *a);
    if (*a == 2.0) {
      half_extent = 8.0 * std::sqrt(2.0 * phi.scale() * t);
    } else {
      // |x|^{-1-a} tail: p_t(x) ~ c_a C t |x|^{-1-a}, two-sided mass 2 c_a C t X^{-a} / a.
      const double ca = std::tgamma(1.0 + *a) * std::sin(pi * *a / 2.0) / pi;
      half_extent = std::max(
          core, std::pow(2.0 * ca * phi.scale() * t / (*a * mass_budget), 1.0 / *a));
    }
  } else {
    const double limit = phi.frequency_limit();
    double xi_unit = 0.0;
    for (double r = limit / 4096.0; r <= limit; r += limit / 4096.0) {
      const double v = t * phi.re_radial(r);
      if (xi_unit == 0.0 && v >= 1.0) xi_unit = r;
      if (v >= decay) {
        xi_max = r;
        break;
      }
    }
    require(xi_max > 0.0, ErrorCode::Resolution,
            "tabulated exponent does not decay to 1e-12 within its lattice");
    half_extent = std::max(16.0, 256.0 / xi_unit);
  }
  const double spacing = pi / (1.1 * xi_max);
  std::size_t n = 8;
  while (static_cast<double>(n) * spacing < 2.0 * half_extent) n *= 2;
  GridSpec g{half_extent, n, phi.dim()};
  require(g.total_points() <= (std::size_t{1} << 24), ErrorCode::SizeLimit,
          "default grid would exceed 2^24 points; supply an explicit grid");
  return g;
}

KernelGrid transition_density(const LevyExponent& phi, double t, const GridSpec& grid) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidArgument, "time must be positive");
  grid.validate();
  require(grid.dim == phi.dim(), ErrorCode::InvalidArgument,
          "grid dimension does not match the exponent");
  if (phi.family() == Family::Tabulated) {
    const double times[] = {t};
    const auto rows = check_integrability(phi, times);
    require(rows.front().finite(), ErrorCode::Divergent,
            "exp(-t Re Phi) is not integrable; no bounded density exists");
    require(grid.nyquist() * std::sqrt(static_cast<double>(grid.dim)) <= phi.frequency_limit(),
            ErrorCode::Extent, "grid frequencies extend beyond the tabulated lattice");
  }
  // Aliasing guard on each axis at the Nyquist frequency.
  const double edge = std::exp(-t * phi.re_radial(grid.nyquist()));
  require(edge < kAliasFloor, ErrorCode::Resolution,
          "dual grid does not resolve exp(-t Phi): |exp(-t Phi)| = " + fmt_double(edge) +
              " at the Nyquist frequency");

  const std::size_t n = grid.n;
  const int d = grid.dim;
  const std::size_t total = grid.total_points();
  KernelGrid out;
  out.t = t;
  out.grid = grid;
  out.fourier.resize(total);
  std::vector<fft::cplx> buf(total);
  std::vector<std::size_t> idx;
  std::vector<double> xi(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    unflatten(flat, n, d, idx);
    double sign = 1.0;
    for (int a = 0; a < d; ++a) {
      const auto k = idx[static_cast<std::size_t>(a)];
      xi[static_cast<std::size_t>(a)] = grid.xi(k);
      // exp(i xi_k x_0) with x_0 = -half_extent is (-1)^k.
      if (grid.signed_index(k) % 2 != 0) sign = -sign;
    }
    const fft::cplx cf = std::exp(-t * phi(xi));
    out.fourier[flat] = cf;
    // The transform of p_t is E exp(-i xi X_t) = conj(cf).
    buf[flat] = sign * std::conj(cf);
  }
  fft::backward(buf, n, d);
  const double norm = 1.0 / std::pow(grid.period(), d);
  out.values.resize(total);
  double peak = 0.0;
  double lowest = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double v = buf[i].real() * norm;
    out.values[i] = v;
    peak = std::max(peak, v);
    lowest = std::min(lowest, v);
  }
  require(lowest >= -kNegativeTolerance * peak, ErrorCode::Resolution,
          "Fourier inversion ringing below -1e-9 of the peak (min " + fmt_double(lowest) + ")");
  if (lowest < 0.0) {
    for (auto& v : out.values) {
      if (v < 0.0) {
        v = 0.0;
        ++out.clipped;
      }
    }
    out.min_before_clip = lowest;
    spdlog::debug("transition_density: clipped {} negative values (min {:.3e}, t={})",
                  out.clipped, lowest, t);
  }
  const double mass = out.mass();
  require(std::abs(mass - 1.0) <= kMassTolerance, ErrorCode::Resolution,
          "kernel mass " + fmt_double(mass) + " outside 1 +/- 1e-6");
  return out;
}

double density_at(const LevyExponent& phi, double t, double x, const quad::Options& opt) {
  require(phi.dim() == 1, ErrorCode::Unsupported, "pointwise density evaluation needs dim = 1");
  require(t > 0.0, ErrorCode::InvalidArgument, "time must be positive");
  // p_t(x) = (1/pi) int_0^inf Re[exp(-t Phi(xi)) exp(-i xi x)] d xi.
  auto g = [&](double xi) {
    const cplx v = std::exp(-t * phi.at(xi)) * std::polar(1.0, -xi * x);
    return v.real() / pi;
  };
  const auto res = quad::half_line(g, density_options(phi, t, opt), phi.frequency_limit());
  require(res.status == quad::Status::Finite, ErrorCode::Divergent,
          "inversion integral did not converge");
  return res.value;
}

double semigroup_defect(const LevyExponent& phi, double t, double s, const GridSpec& grid) {
  require(t > 0.0 && s > 0.0, ErrorCode::InvalidArgument, "times must be positive");
  require(grid.dim == 1, ErrorCode::Unsupported, "semigroup check is one-dimensional");
  const auto kt = transition_density(phi, t, grid);
  const auto ks = transition_density(phi, s, grid);
  const auto kts = transition_density(phi, t + s, grid);
  const std::size_t n = grid.n;
  const std::size_t half = n / 2;
  const double h = grid.spacing();
  double defect = 0.0;
  // x_i - y_j = (i - j) h is the lattice point with index i - j + n/2 (mod n).
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += kt.values[(i + n + half - j) % n] * ks.values[j];
    }
    defect = std::max(defect, std::abs(acc * h - kts.values[i]));
  }
  return defect;
}

namespace {

// Periodic convolution of the kernel with a measure given by its transform
// on the kernel's dual lattice: (1/L) sum_k phat_k muhat_k exp(i xi_k x_j).
std::vector<double> spectral_convolve(const KernelGrid& kernel,
                                      const std::vector<fft::cplx>& mu_hat) {
  const GridSpec& g = kernel.grid;
  std::vector<fft::cplx> buf(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    const double sign = (g.signed_index(k) % 2 != 0) ? -1.0 : 1.0;
    buf[k] = sign * std::conj(kernel.fourier[k]) * mu_hat[k];
  }
  fft::backward(buf, g.n, 1);
  std::vector<double> out(g.n);
  for (std::size_t j = 0; j < g.n; ++j) out[j] = buf[j].real() / g.period();
  return out;
}

}  // namespace

std::vector<double> convolve_initial(const KernelGrid& kernel, const InitialMeasure& mu) {
  const GridSpec& g = kernel.grid;
  require(g.dim == 1, ErrorCode::Unsupported, "convolution with initial data is one-dimensional");
  switch (mu.kind()) {
    case InitialMeasure::Kind::Lebesgue:
      return std::vector<double>(g.n, kernel.mass());
    case InitialMeasure::Kind::Dirac:
    case InitialMeasure::Kind::AtomMix: {
      for (const auto& a : mu.atom_list()) {
        require(a.location >= -g.half_extent && a.location <= g.half_extent, ErrorCode::Extent,
                "atom at " + fmt_double(a.location) + " lies outside the grid extent");
      }
      std::vector<fft::cplx> mu_hat(g.n);
      for (std::size_t k = 0; k < g.n; ++k) mu_hat[k] = mu.fourier(g.xi(k));
      auto field = spectral_convolve(kernel, mu_hat);
      for (auto& v : field) v = std::max(v, 0.0);
      return field;
    }
    case InitialMeasure::Kind::DensityGrid: {
      // Resample onto the kernel lattice (linear, zero outside the source grid).
      const GridSpec& src = mu.density_grid();
      const auto& vals = mu.density_values();
      std::vector<fft::cplx> buf(g.n);
      for (std::size_t j = 0; j < g.n; ++j) {
        const double pos = (g.x(j) - src.x(0)) / src.spacing();
        double v = 0.0;
        if (pos >= 0.0 && pos <= static_cast<double>(src.n - 1)) {
          const auto lo = static_cast<std::size_t>(std::floor(pos));
          const std::size_t hi = std::min(lo + 1, src.n - 1);
          const double w = pos - static_cast<double>(lo);
          v = (1.0 - w) * vals[lo] + w * vals[hi];
        }
        buf[j] = v;
      }
      fft::forward(buf, g.n, 1);
      // Transform of the lattice density: h exp(-i xi_k x_0) FFT_k = h (-1)^k FFT_k.
      for (std::size_t k = 0; k < g.n; ++k) {
        const double sign = (g.signed_index(k) % 2 != 0) ? -1.0 : 1.0;
        buf[k] *= sign * g.spacing();
      }
      auto field = spectral_convolve(kernel, buf);
      for (auto& v : field) v = std::max(v, 0.0);
      return field;
    }
  }
  return {};
}

std::vector<AdmissibilityRow> check_initial_admissible(const LevyExponent& phi,
                                                       const InitialMeasure& mu,
                                                       std::span<const double> times,
                                                       std::span<const double> points,
                                                       const quad::Options& opt) {
  require(!times.empty() && !points.empty(), ErrorCode::InvalidArgument,
          "time and point lists must be nonempty");
  require(phi.dim() == 1, ErrorCode::Unsupported, "admissibility check is one-dimensional");
  for (double t : times) {
    require(t > 0.0, ErrorCode::InvalidArgument, "times must be positive");
  }

  bool boundary_mass = false;
  bool tail_growth = false;
  if (mu.kind() == InitialMeasure::Kind::DensityGrid) {
    const auto& v = mu.density_values();
    const std::size_t n = v.size();
    const std::size_t band = std::max<std::size_t>(n / 16, 1);
    double edge = 0.0, total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      total += v[j];
      if (j < band || j >= n - band) edge += v[j];
    }
    boundary_mass = edge > 1e-6 * total;
    // Growth towards either edge across the band signals a truncated heavy tail.
    tail_growth = (v[0] > v[band] && v[band] > v[2 * band] && v[0] > 0.0) ||
                  (v[n - 1] > v[n - 1 - band] && v[n - 1 - band] > v[n - 1 - 2 * band]);
    if (boundary_mass) {
      spdlog::warn("initial density carries {:.3e} of its mass near the grid boundary",
                   edge / total);
    }
  }

  std::vector<AdmissibilityRow> rows;
  for (double t : times) {
    for (double x : points) {
      AdmissibilityRow row{t, x};
      switch (mu.kind()) {
        case InitialMeasure::Kind::Lebesgue:
          // int p_t(x - y) dy is the kernel mass, the transform at the origin.
          row.value = std::exp(-t * phi.at(0.0)).real();
          break;
        case InitialMeasure::Kind::Dirac:
        case InitialMeasure::Kind::AtomMix:
          for (const auto& a : mu.atom_list()) {
            row.value += a.weight * density_at(phi, t, x - a.location, opt);
          }
          break;
        case InitialMeasure::Kind::DensityGrid: {
          const GridSpec& src = mu.density_grid();
          const auto& v = mu.density_values();
          for (std::size_t j = 0; j < src.n; ++j) {
            if (v[j] == 0.0) continue;
            row.value += v[j] * density_at(phi, t, x - src.x(j), opt);
          }
          row.value *= src.spacing();
          break;
        }
      }
      row.boundary_mass = boundary_mass;
      row.tail_growth = tail_growth;
      row.status = (boundary_mass || tail_growth || !std::isfinite(row.value))
                       ? quad::Status::Inconclusive
                       : quad::Status::Finite;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_kernel_csv(std::ostream& out, const KernelGrid& kernel, const LevyExponent& phi) {
  require(kernel.grid.dim == 1, ErrorCode::Unsupported, "kernel CSV export is one-dimensional");
  out << "t," << fmt_double(kernel.t) << '\n'
      << "extent," << fmt_double(kernel.grid.half_extent) << '\n'
      << "n," << kernel.grid.n << '\n'
      << "convention,\"" << phi.convention() << "\"\n"
      << "x,p\n";
  for (std::size_t j = 0; j < kernel.grid.n; ++j) {
    out << fmt_double(kernel.grid.x(j)) << ',' << fmt_double(kernel.values[j]) << '\n';
  }
}

}  // namespace shelab::levy
