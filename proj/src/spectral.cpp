#include "shelab/spectral.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shelab/error.hpp"
#include "shelab/format.hpp"
#include "shelab/lattice.hpp"

namespace shelab::spectral {

using std::numbers::pi;

const char* to_string(CovKind k) noexcept {
  switch (k) {
    case CovKind::White: return "white";
    case CovKind::Riesz: return "riesz";
    case CovKind::GaussianBump: return "gaussian_bump";
    case CovKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

namespace {

double sphere_area(int d) { return 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0); }

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x,
                   const char* what) {
  if (!(x >= 0.0 && x <= xs.back())) {
    throw Error(ErrorCode::Extent,
                std::string(what) + " argument " + fmt_double(x) + " lies beyond the tabulated lattice");
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  if (hi >= xs.size()) hi = xs.size() - 1;
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - w) * ys[lo] + w * ys[hi];
}

void check_lattice(const std::vector<double>& xs, const std::vector<double>& ys, const char* what) {
  require(xs.size() >= 2 && xs.size() == ys.size(), ErrorCode::InvalidArgument,
          std::string(what) + " table needs matching lattices of at least two points");
  require(xs.front() == 0.0, ErrorCode::InvalidArgument,
          std::string(what) + " lattice must start at 0");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    require(xs[i] > xs[i - 1], ErrorCode::InvalidArgument,
            std::string(what) + " lattice must be strictly increasing");
  }
}

// c(alpha, d) from int int |x - y|^-alpha nu(dx) nu(dy) = (2 pi)^-d c int |xi|^(alpha-d) |nuhat|^2
// with nu = N(0, I/2), so that x - y ~ N(0, I) and |nuhat|^2 = exp(-|xi|^2 / 2).
double calibrate_riesz(double alpha, int d) {
  const quad::Options opt{1e-13};
  auto spatial = [&](double r) {
    return sphere_area(d) * std::pow(r, d - 1 - alpha) * std::exp(-r * r / 2.0) /
           std::pow(2.0 * pi, d / 2.0);
  };
  auto spectral = [&](double rho) {
    return sphere_area(d) * std::pow(rho, alpha - 1.0) * std::exp(-rho * rho / 2.0) /
           std::pow(2.0 * pi, d);
  };
  const auto lhs = quad::half_line(spatial, opt);
  const auto rhs = quad::half_line(spectral, opt);
  require(lhs.status == quad::Status::Finite && rhs.status == quad::Status::Finite,
          ErrorCode::Nonconvergence, "Riesz constant calibration did not converge");
  return lhs.value / rhs.value;
}

}  // namespace

Covariance Covariance::white(int dim) {
  require(dim == 1, ErrorCode::InvalidArgument, "white noise is only admitted in dimension 1");
  Covariance c;
  c.kind_ = CovKind::White;
  c.dim_ = dim;
  return c;
}

Covariance Covariance::riesz(double alpha, int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be at least 1");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < dim, ErrorCode::InvalidArgument,
          "Riesz kernel requires 0 < alpha < d (got alpha=" + fmt_double(alpha) +
              ", d=" + std::to_string(dim) + ")");
  Covariance c;
  c.kind_ = CovKind::Riesz;
  c.dim_ = dim;
  c.alpha_ = alpha;
  c.riesz_c_ = calibrate_riesz(alpha, dim);
  return c;
}

Covariance Covariance::gaussian_bump(double width, int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be at least 1");
  require(std::isfinite(width) && width > 0.0, ErrorCode::InvalidArgument,
          "Gaussian bump width must be positive");
  Covariance c;
  c.kind_ = CovKind::GaussianBump;
  c.dim_ = dim;
  c.width_ = width;
  return c;
}

Covariance Covariance::tabulated(std::vector<double> xi, std::vector<double> fhat,
                                 std::vector<double> r, std::vector<double> f) {
  check_lattice(xi, fhat, "spectral density");
  for (double v : fhat) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
            "tabulated spectral density must be finite and nonnegative");
  }
  if (!r.empty() || !f.empty()) check_lattice(r, f, "covariance");
  Covariance c;
  c.kind_ = CovKind::Tabulated;
  c.dim_ = 1;
  c.tab_xi_ = std::move(xi);
  c.tab_fhat_ = std::move(fhat);
  c.tab_r_ = std::move(r);
  c.tab_f_ = std::move(f);
  return c;
}

bool Covariance::has_function() const {
  switch (kind_) {
    case CovKind::White: return false;
    case CovKind::Tabulated: return !tab_r_.empty();
    default: return true;
  }
}

double Covariance::f(double r) const {
  r = std::abs(r);
  switch (kind_) {
    case CovKind::White:
      throw Error(ErrorCode::Unsupported, "white noise has no covariance function (f = delta)");
    case CovKind::Riesz:
      return r == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(r, -alpha_);
    case CovKind::GaussianBump:
      return std::exp(-r * r / (2.0 * width_ * width_));
    case CovKind::Tabulated:
      require(!tab_r_.empty(), ErrorCode::Unsupported, "covariance table has no f values");
      return interpolate(tab_r_, tab_f_, r, "covariance");
  }
  return 0.0;
}

double Covariance::fhat(double rho) const {
  rho = std::abs(rho);
  switch (kind_) {
    case CovKind::White: return 1.0;
    case CovKind::Riesz:
      return rho == 0.0 ? std::numeric_limits<double>::infinity()
                        : riesz_c_ * std::pow(rho, alpha_ - dim_);
    case CovKind::GaussianBump:
      return std::pow(2.0 * pi * width_ * width_, dim_ / 2.0) *
             std::exp(-width_ * width_ * rho * rho / 2.0);
    case CovKind::Tabulated: return interpolate(tab_xi_, tab_fhat_, rho, "spectral density");
  }
  return 0.0;
}

std::optional<double> Covariance::spectral_homogeneity() const {
  switch (kind_) {
    case CovKind::White: return 0.0;
    case CovKind::Riesz: return alpha_ - dim_;
    default: return std::nullopt;
  }
}

double Covariance::spectral_limit() const {
  return kind_ == CovKind::Tabulated ? tab_xi_.back() : std::numeric_limits<double>::infinity();
}

std::string Covariance::fingerprint() const {
  std::ostringstream os;
  os << to_string(kind_) << ";d=" << dim_;
  switch (kind_) {
    case CovKind::Riesz: os << ";alpha=" << fmt_double(alpha_); break;
    case CovKind::GaussianBump: os << ";w=" << fmt_double(width_); break;
    case CovKind::Tabulated:
      for (std::size_t i = 0; i < tab_xi_.size(); ++i) {
        os << ';' << fmt_double(tab_xi_[i]) << ':' << fmt_double(tab_fhat_[i]);
      }
      break;
    case CovKind::White: break;
  }
  return os.str();
}

Covariance make_covariance(CovKind kind, const CovarianceParams& params, int dim) {
  switch (kind) {
    case CovKind::White: return Covariance::white(dim);
    case CovKind::Riesz: return Covariance::riesz(params.alpha, dim);
    case CovKind::GaussianBump: return Covariance::gaussian_bump(params.width, dim);
    case CovKind::Tabulated:
      throw Error(ErrorCode::InvalidArgument, "tabulated covariances are built from their tables");
  }
  throw Error(ErrorCode::InvalidArgument, "unknown covariance kind");
}

quad::HalfLine radial_integral(const std::function<double(double)>& g, int dim,
                               const quad::Options& opt, double limit) {
  const double area = sphere_area(dim);
  auto radial = [&](double r) { return area * std::pow(r, dim - 1) * g(r); };
  return quad::half_line(radial, opt, limit);
}

// ---------------------------------------------------------------------------
// Parseval identity

namespace {

constexpr double kRefinementTolerance = 1e-4;

double lattice_energy(const Covariance& cov, const std::vector<double>& values, double h) {
  const auto lags = lattice::correlate(values, values, h);
  return lattice::integrate_even_weight([&](double r) { return cov.f(r); }, lags, h);
}

}  // namespace

ParsevalReport parseval_check(const Covariance& cov, const levy::InitialMeasure& nu,
                              const quad::Options& opt) {
  require(cov.kind() != CovKind::White, ErrorCode::InvalidArgument,
          "the Parseval check needs f as a function; white noise has none");
  require(cov.has_function(), ErrorCode::InvalidArgument, "covariance has no f values");
  require(cov.dim() == 1, ErrorCode::Unsupported, "test measures are one-dimensional");
  using Kind = levy::InitialMeasure::Kind;
  require(nu.kind() != Kind::Lebesgue, ErrorCode::InvalidArgument,
          "the Parseval check needs a finite measure");

  ParsevalReport rep;
  double band = cov.spectral_limit();
  if (nu.kind() == Kind::DensityGrid) {
    const auto& values = nu.density_values();
    const double h = nu.density_grid().spacing();
    rep.lhs = lattice_energy(cov, values, h);
    std::vector<double> coarse;
    for (std::size_t j = 0; j < values.size(); j += 2) coarse.push_back(values[j]);
    const double lhs_coarse = lattice_energy(cov, coarse, 2.0 * h);
    require(std::abs(rep.lhs - lhs_coarse) <= kRefinementTolerance * std::abs(rep.lhs),
            ErrorCode::Nonconvergence,
            "physical-space quadrature changed by more than 1e-4 under refinement");
    band = std::min(band, nu.density_grid().nyquist());
  } else {
    const auto& atoms = nu.atom_list();
    for (const auto& ai : atoms) {
      for (const auto& aj : atoms) rep.lhs += ai.weight * aj.weight * cov.f(ai.location - aj.location);
    }
  }

  auto integrand = [&](double rho) {
    return cov.fhat(rho) * std::norm(nu.fourier(rho)) / pi;  // (2 pi)^-1 * 2 half-lines
  };
  quad::Options ropt = opt;
  const auto rhs = quad::half_line(integrand, ropt, band);
  if (rhs.status == quad::Status::Divergent) {
    rep.rhs = std::numeric_limits<double>::infinity();
  } else {
    require(rhs.status == quad::Status::Finite, ErrorCode::Nonconvergence,
            "spectral-side integral is inconclusive");
    rep.rhs = rhs.value;
  }
  if (nu.kind() == Kind::DensityGrid && band < cov.spectral_limit()) {
    const double edge = std::norm(nu.fourier(band)) / std::max(std::norm(nu.fourier(0.0)), 1e-300);
    require(edge < 1e-12, ErrorCode::Nonconvergence,
            "density transform is not negligible at the lattice Nyquist frequency");
  }

  const bool lhs_inf = std::isinf(rep.lhs);
  const bool rhs_inf = std::isinf(rep.rhs);
  if (lhs_inf && rhs_inf) {
    rep.both_divergent = true;
    rep.rel_err = 0.0;
  } else if (lhs_inf || rhs_inf) {
    rep.rel_err = std::numeric_limits<double>::infinity();
  } else {
    rep.rel_err = std::abs(rep.lhs - rep.rhs) / std::abs(rep.rhs);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Noise

NoiseGenerator::NoiseGenerator(const Covariance& cov, const GridSpec& grid, double dt)
    : grid_(grid), dt_(dt) {
  grid.validate();
  require(grid.dim == 1 && cov.dim() == 1, ErrorCode::Unsupported,
          "noise generation is one-dimensional");
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "dt must be positive");
  const double length = grid.period();
  amplitude_.resize(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    double fh;
    if (k == 0 && cov.spectrally_singular_at_origin()) {
      // Average of fhat over the zero cell [-pi/L, pi/L]; the cell-integrated
      // spectral mass is what a periodic lattice can represent.
      const double half = grid.dxi() / 2.0;
      fh = quad::finite([&](double r) { return cov.fhat(r); }, 0.0, half) / half;
      regularized_ = true;
      zero_mode_ = fh;
    } else {
      fh = cov.fhat(grid.xi(k));
    }
    amplitude_[k] = std::sqrt(fh * dt / length);
  }
  if (regularized_) {
    spdlog::info("noise: fhat(0) is infinite; zero mode set to its zero-cell average {:.6g}",
                 zero_mode_);
  }
}

double NoiseGenerator::sample_into(Rng& rng, std::vector<double>& out,
                                   std::vector<fft::cplx>& scratch) const {
  const std::size_t n = grid_.n;
  const std::size_t half = n / 2;
  scratch.assign(n, fft::cplx{0.0, 0.0});
  // Hermitian symmetry Z_{n-k} = conj(Z_k) makes the inverse transform real.
  scratch[0] = amplitude_[0] * rng.normal();
  scratch[half] = amplitude_[half] * rng.normal();
  for (std::size_t k = 1; k < half; ++k) {
    const double re = rng.normal() / std::numbers::sqrt2;
    const double im = rng.normal() / std::numbers::sqrt2;
    scratch[k] = amplitude_[k] * fft::cplx{re, im};
    scratch[n - k] = amplitude_[n - k] * fft::cplx{re, -im};
  }
  // exp(i xi_k x_0) = (-1)^k on this lattice.
  for (std::size_t k = 0; k < n; ++k) {
    if (grid_.signed_index(k) % 2 != 0) scratch[k] = -scratch[k];
  }
  fft::backward(scratch, n, 1);
  out.resize(n);
  double re_max = 0.0, im_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = scratch[j].real();
    re_max = std::max(re_max, std::abs(scratch[j].real()));
    im_max = std::max(im_max, std::abs(scratch[j].imag()));
  }
  return re_max > 0.0 ? im_max / re_max : 0.0;
}

std::vector<double> NoiseGenerator::sample(Rng& rng) const {
  std::vector<double> out;
  std::vector<fft::cplx> scratch;
  sample_into(rng, out, scratch);
  return out;
}

std::vector<double> sample_noise_increment(const Covariance& cov, const GridSpec& grid, double dt,
                                           Rng& rng) {
  return NoiseGenerator(cov, grid, dt).sample(rng);
}

}  // namespace shelab::spectral
