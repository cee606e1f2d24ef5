#include "shelab/simulator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "shelab/fft.hpp"
#include "shelab/format.hpp"
#include "shelab/parallel.hpp"

namespace shelab::sim {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- coefficients

Coefficient Coefficient::zero() { return Coefficient{}; }

Coefficient Coefficient::affine(double c0, double c1) {
  require(std::isfinite(c0) && std::isfinite(c1), ErrorCode::InvalidArgument,
          "affine coefficient parameters must be finite");
  Coefficient c;
  c.kind_ = Kind::Affine;
  c.c0_ = c0;
  c.c1_ = c1;
  return c;
}

Coefficient Coefficient::tabulated(std::vector<double> u, std::vector<double> values,
                                   double declared_lipschitz) {
  require(u.size() >= 2 && u.size() == values.size(), ErrorCode::InvalidArgument,
          "tabulated coefficient needs at least two (u, value) pairs");
  require(std::isfinite(declared_lipschitz) && declared_lipschitz >= 0.0,
          ErrorCode::InvalidArgument, "declared Lipschitz constant must be finite and >= 0");
  double slope = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    require(std::isfinite(u[i]) && std::isfinite(values[i]), ErrorCode::InvalidArgument,
            "tabulated coefficient entries must be finite");
    if (i == 0) continue;
    require(u[i] > u[i - 1], ErrorCode::InvalidArgument,
            "tabulated coefficient grid must be strictly increasing");
    slope = std::max(slope, std::abs(values[i] - values[i - 1]) / (u[i] - u[i - 1]));
  }
  require(slope <= declared_lipschitz * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "declared Lipschitz constant " + fmt_double(declared_lipschitz) +
              " is below the tabulated slope " + fmt_double(slope));
  Coefficient c;
  c.kind_ = Kind::Tabulated;
  c.u_ = std::move(u);
  c.v_ = std::move(values);
  c.declared_ = declared_lipschitz;
  return c;
}

double Coefficient::operator()(double u) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Affine:
      return c0_ + c1_ * u;
    case Kind::Tabulated: {
      if (u <= u_.front()) return v_.front();
      if (u >= u_.back()) return v_.back();
      const auto it = std::upper_bound(u_.begin(), u_.end(), u);
      const auto i = static_cast<std::size_t>(it - u_.begin());
      const double w = (u - u_[i - 1]) / (u_[i] - u_[i - 1]);
      return (1.0 - w) * v_[i - 1] + w * v_[i];
    }
  }
  return 0.0;
}

double Coefficient::lipschitz() const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Affine:
      return std::abs(c1_);
    case Kind::Tabulated:
      return declared_;
  }
  return 0.0;
}

const char* to_string(Coefficient::Kind k) noexcept {
  switch (k) {
    case Coefficient::Kind::Zero:
      return "zero";
    case Coefficient::Kind::Affine:
      return "affine";
    case Coefficient::Kind::Tabulated:
      return "tabulated";
  }
  return "?";
}

// ---------------------------------------------------------------- config

double SheConfig::dt_ceiling() const {
  const double h = grid.spacing();
  if (phi.family() == levy::Family::Tabulated) return 0.25 / phi.re_radial(1.0 / h);
  return std::pow(h, phi.a()) / (4.0 * phi.scale());
}

std::size_t SheConfig::steps() const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

std::size_t SheConfig::stride() const {
  if (record_stride > 0) return record_stride;
  const std::size_t k = steps();
  return std::max<std::size_t>(1, (k + 199) / 200);
}

void SheConfig::validate() const {
  grid.validate();
  require(grid.dim == 1 && phi.dim() == 1 && cov.dim() == 1, ErrorCode::Unsupported,
          "the solver is one-dimensional");
  require(std::isfinite(T) && T > 0.0, ErrorCode::InvalidArgument, "horizon T must be positive");
  require(std::isfinite(dt) && dt > 0.0 && dt <= T, ErrorCode::InvalidArgument,
          "time step must lie in (0, T]");
  const double n = std::round(T / dt);
  require(std::abs(n * dt - T) <= 1e-9 * T, ErrorCode::InvalidArgument,
          "T must be an integer multiple of dt");
  require(n <= 1e8, ErrorCode::SizeLimit, "more than 1e8 time steps");
  const double ceiling = dt_ceiling();
  require(dt <= ceiling * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "dt = " + fmt_double(dt) + " exceeds the noise-resolution ceiling dx^a/(4C) = " +
              fmt_double(ceiling));
  if (phi.family() == levy::Family::Tabulated) {
    require(grid.nyquist() <= phi.frequency_limit(), ErrorCode::Extent,
            "grid frequencies extend beyond the tabulated exponent");
  }
  for (const auto& a : mu.atom_list()) {
    require(std::abs(a.location) < grid.half_extent, ErrorCode::Extent,
            "atom at " + fmt_double(a.location) + " lies outside the domain");
  }
}

namespace {

constexpr double kOverflowGuard = 1e150;
constexpr double kSignificant = 1e-10;
constexpr double kWrapBudget = 1e-6;
constexpr int kBootstrap = 1000;
constexpr std::size_t kBlock = 8;

// Everything shared by the paths of one run.
struct Plan {
  GridSpec g;
  std::size_t K = 0;
  double dt = 0.0;
  std::vector<std::size_t> rec_steps;
  std::vector<double> times;
  std::vector<double> sign;
  std::vector<cplx> step_mult;  // transform of p_dt on the dual lattice
  std::vector<cplx> mu_hat;
  std::vector<std::vector<double>> reference;
  std::optional<spectral::NoiseGenerator> noise;
  const Coefficient* b = nullptr;
  const Coefficient* sigma = nullptr;
  double T = 0.0;
};

// Transform coordinates: That_k = int exp(-i xi_k x) u(x) dx on the lattice.
void to_field(const Plan& pl, std::span<const cplx> hat, std::vector<double>& out,
              std::vector<cplx>& scratch) {
  const std::size_t n = pl.g.n;
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) scratch[k] = pl.sign[k] * hat[k];
  fft::backward(scratch, n, 1);
  out.resize(n);
  const double inv = 1.0 / pl.g.period();
  for (std::size_t j = 0; j < n; ++j) out[j] = scratch[j].real() * inv;
}

void add_transform(const Plan& pl, std::span<const double> field, std::vector<cplx>& hat,
                   std::vector<cplx>& scratch) {
  const std::size_t n = pl.g.n;
  scratch.assign(field.begin(), field.end());
  fft::forward(scratch, n, 1);
  const double h = pl.g.spacing();
  for (std::size_t k = 0; k < n; ++k) hat[k] += h * pl.sign[k] * scratch[k];
}

std::vector<cplx> initial_transform(const SheConfig& c, const GridSpec& g,
                                    const std::vector<double>& sign) {
  const std::size_t n = g.n;
  std::vector<cplx> hat(n, cplx{0.0, 0.0});
  switch (c.mu.kind()) {
    case levy::InitialMeasure::Kind::Lebesgue:
      hat[0] = g.period();
      break;
    case levy::InitialMeasure::Kind::Dirac:
    case levy::InitialMeasure::Kind::AtomMix:
      // Exact transform: a Dirac mass is never gridded as a spike.
      for (std::size_t k = 0; k < n; ++k) hat[k] = c.mu.fourier(g.xi(k));
      break;
    case levy::InitialMeasure::Kind::DensityGrid: {
      const GridSpec& src = c.mu.density_grid();
      const auto& vals = c.mu.density_values();
      std::vector<cplx> buf(n);
      for (std::size_t j = 0; j < n; ++j) {
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
      fft::forward(buf, n, 1);
      for (std::size_t k = 0; k < n; ++k) hat[k] = g.spacing() * sign[k] * buf[k];
      break;
    }
  }
  return hat;
}

Plan make_plan(const SheConfig& c) {
  c.validate();
  Plan pl;
  pl.g = c.grid;
  pl.K = c.steps();
  pl.dt = c.dt;
  pl.T = c.T;
  pl.b = &c.b;
  pl.sigma = &c.sigma;
  const std::size_t n = pl.g.n;
  const std::size_t stride = c.stride();
  for (std::size_t k = 0; k < pl.K; k += stride) pl.rec_steps.push_back(k);
  pl.rec_steps.push_back(pl.K);
  for (auto k : pl.rec_steps) pl.times.push_back(k == pl.K ? c.T : static_cast<double>(k) * c.dt);

  pl.sign.resize(n);
  pl.step_mult.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    pl.sign[k] = (pl.g.signed_index(k) % 2 != 0) ? -1.0 : 1.0;
    pl.step_mult[k] = std::conj(std::exp(-c.dt * c.phi.at(pl.g.xi(k))));
  }
  pl.mu_hat = initial_transform(c, pl.g, pl.sign);

  // Same multiplier recursion as the solver, so that with b = sigma = 0 the
  // solution reproduces the reference bit for bit.
  std::vector<cplx> hat = pl.mu_hat, scratch;
  std::vector<double> field;
  std::size_t next = 0;
  for (std::size_t k = 0; k <= pl.K; ++k) {
    if (k > 0) {
      for (std::size_t i = 0; i < n; ++i) hat[i] *= pl.step_mult[i];
    }
    if (pl.rec_steps[next] != k) continue;
    to_field(pl, hat, field, scratch);
    for (auto& v : field) v = std::max(v, 0.0);
    pl.reference.push_back(field);
    ++next;
  }

  if (c.mu.kind() != levy::InitialMeasure::Kind::Lebesgue) {
    const double times[] = {c.T};
    const double points[] = {0.0};
    for (const auto& row : levy::check_initial_admissible(c.phi, c.mu, times, points)) {
      require(row.status != quad::Status::Divergent, ErrorCode::Divergent,
              "initial measure is not admissible: p_t * mu diverges at t=" + fmt_double(row.t));
    }
    // Periodic wrap-around guard on the deterministic reference at T.
    const auto& ref = pl.reference.back();
    double total = 0.0, band = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      total += ref[j];
      if (std::abs(pl.g.x(j)) >= 0.75 * pl.g.half_extent) band += ref[j];
    }
    require(total > 0.0 && band <= kWrapBudget * total, ErrorCode::Extent,
            "domain too small: p_T * mu carries " + fmt_double(total > 0.0 ? band / total : 1.0) +
                " of its mass within X/4 of the boundary");
  }
  if (!c.sigma.is_zero()) pl.noise.emplace(c.cov, pl.g, c.dt);
  return pl;
}

struct PathBuffers {
  std::vector<cplx> hat, scratch;
  std::vector<double> u, g, w;
  std::vector<cplx> noise_scratch;
};

// One path. `driver[k]` (Picard) replaces u(t_k) as the argument of b and sigma;
// `linear` drops both coefficients. visit(step, field) sees steps 0 .. K.
template <class Visit>
void run_path(const Plan& pl, Rng* rng, const std::vector<std::vector<double>>* driver,
              bool linear, std::uint64_t seed, PathBuffers& buf, Visit&& visit) {
  const std::size_t n = pl.g.n;
  buf.hat = pl.mu_hat;
  to_field(pl, buf.hat, buf.u, buf.scratch);
  visit(std::size_t{0}, std::span<const double>(buf.u));
  const bool drift = !linear && !pl.b->is_zero();
  const bool noisy = !linear && pl.noise.has_value();
  buf.g.resize(n);
  for (std::size_t k = 0; k < pl.K; ++k) {
    if (drift || noisy) {
      const std::vector<double>& arg = driver ? (*driver)[k] : buf.u;
      if (noisy) pl.noise->sample_into(*rng, buf.w, buf.noise_scratch);
      for (std::size_t j = 0; j < n; ++j) {
        double v = drift ? (*pl.b)(arg[j]) * pl.dt : 0.0;
        if (noisy) v += (*pl.sigma)(arg[j]) * buf.w[j];
        buf.g[j] = v;
      }
      add_transform(pl, buf.g, buf.hat, buf.scratch);
    }
    for (std::size_t i = 0; i < n; ++i) buf.hat[i] *= pl.step_mult[i];
    to_field(pl, buf.hat, buf.u, buf.scratch);
    double peak = 0.0;
    for (double v : buf.u) {
      if (!std::isfinite(v)) {
        peak = std::numeric_limits<double>::infinity();
        break;
      }
      peak = std::max(peak, std::abs(v));
    }
    if (peak > kOverflowGuard) {
      throw Error(ErrorCode::Instability,
                  "solution exceeded 1e150 at t=" + fmt_double(static_cast<double>(k + 1) * pl.dt) +
                      " on the path with seed " + std::to_string(seed));
    }
    visit(k + 1, std::span<const double>(buf.u));
  }
}

double tau_for(const SheConfig& c) { return bounds::tau_const(bound_params(c, 2)); }

// Lattice points where tau + reference is not negligible, per recorded time.
std::vector<std::vector<char>> significant_mask(const Plan& pl, double tau) {
  std::vector<std::vector<char>> mask;
  for (const auto& ref : pl.reference) {
    double top = 0.0;
    for (double r : ref) top = std::max(top, tau + r);
    std::vector<char> m(ref.size());
    for (std::size_t j = 0; j < ref.size(); ++j) m[j] = (tau + ref[j]) >= kSignificant * top;
    mask.push_back(std::move(m));
  }
  return mask;
}

// Runs `count` paths in fixed blocks of kBlock; each block accumulates into its
// own buffer with `body(path, acc)`, and blocks are summed in block order so the
// result does not depend on the number of threads.
template <class Body>
std::vector<double> block_reduce(std::size_t count, std::size_t size, unsigned threads,
                                 Body&& body) {
  std::vector<double> total(size, 0.0);
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  const std::size_t wave = resolve_threads(threads);
  for (std::size_t b0 = 0; b0 < blocks; b0 += wave) {
    const std::size_t nb = std::min(wave, blocks - b0);
    std::vector<std::vector<double>> acc(nb, std::vector<double>(size, 0.0));
    parallel_for(nb, threads, [&](std::size_t i) {
      const std::size_t first = (b0 + i) * kBlock;
      const std::size_t last = std::min(count, first + kBlock);
      for (std::size_t path = first; path < last; ++path) body(path, acc[i]);
    });
    for (const auto& a : acc) {
      for (std::size_t j = 0; j < size; ++j) total[j] += a[j];
    }
  }
  return total;
}

double ols_slope(std::span<const double> t, std::span<const double> y, double* intercept) {
  const double m = static_cast<double>(t.size());
  double tb = 0.0, yb = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tb += t[i];
    yb += y[i];
  }
  tb /= m;
  yb /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - tb) * (y[i] - yb);
    sxx += (t[i] - tb) * (t[i] - tb);
  }
  const double slope = sxy / sxx;
  if (intercept) *intercept = yb - slope * tb;
  return slope;
}

double stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------- solver

Trajectory solve_mild(const SheConfig& config, Rng& rng) {
  const Plan pl = make_plan(config);
  Trajectory out;
  out.grid = pl.g;
  out.times = pl.times;
  out.reference = pl.reference;
  out.seed = config.seed;
  PathBuffers buf;
  std::size_t next = 0;
  run_path(pl, &rng, nullptr, false, config.seed, buf, [&](std::size_t k, std::span<const double> u) {
    if (next < pl.rec_steps.size() && pl.rec_steps[next] == k) {
      out.fields.emplace_back(u.begin(), u.end());
      ++next;
    }
  });
  return out;
}

PicardResult picard_iterate(const SheConfig& config, int n_max, double beta, int p,
                            std::size_t paths) {
  require(n_max >= 1, ErrorCode::InvalidArgument, "at least one Picard iteration is required");
  require(std::isfinite(beta) && beta >= 0.0, ErrorCode::InvalidArgument, "beta must be >= 0");
  require(p >= 1, ErrorCode::InvalidArgument, "moment order must be positive");
  require(paths >= 1, ErrorCode::InvalidArgument, "at least one path is required");
  const Plan pl = make_plan(config);
  const double tau = tau_for(config);
  const std::size_t n = pl.g.n;
  const std::size_t R = pl.rec_steps.size();
  const auto mask = significant_mask(pl, tau);

  // u^0 = p_t * mu on every step, shared by all paths.
  std::vector<std::vector<double>> u0(pl.K + 1);
  {
    PathBuffers buf;
    run_path(pl, nullptr, nullptr, true, config.seed, buf,
             [&](std::size_t k, std::span<const double> u) { u0[k].assign(u.begin(), u.end()); });
  }

  PicardResult res;
  res.times = pl.times;
  res.tau = tau;
  res.paths = paths;
  res.iterates.resize(static_cast<std::size_t>(n_max) + 1);
  for (auto k : pl.rec_steps) res.iterates[0].push_back(u0[k]);

  const std::size_t nm = static_cast<std::size_t>(n_max);
  const std::size_t size = nm * R * n;
  const double pp = static_cast<double>(p);
  const auto sums = block_reduce(paths, size, config.threads, [&](std::size_t path,
                                                                   std::vector<double>& acc) {
    const std::uint64_t seed = stream_seed(config.seed, path);
    std::vector<std::vector<double>> prev = u0, cur(pl.K + 1);
    PathBuffers buf;
    for (std::size_t it = 0; it < nm; ++it) {
      Rng rng(seed);  // frozen noise: every iterate replays the same increments
      std::size_t next = 0;
      run_path(pl, &rng, &prev, false, seed, buf, [&](std::size_t k, std::span<const double> u) {
        cur[k].assign(u.begin(), u.end());
        if (next < R && pl.rec_steps[next] == k) {
          double* a = acc.data() + (it * R + next) * n;
          const auto& ref = pl.reference[next];
          for (std::size_t j = 0; j < n; ++j) {
            a[j] += std::pow(std::abs(u[j] - prev[k][j]) / (tau + ref[j]), pp);
          }
          ++next;
        }
      });
      if (path == 0) {
        auto& store = res.iterates[it + 1];
        for (auto k : pl.rec_steps) store.push_back(cur[k]);
      }
      std::swap(prev, cur);
    }
  });

  const double M = static_cast<double>(paths);
  for (std::size_t it = 0; it < nm; ++it) {
    double gap = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double w = std::exp(-beta * pl.times[r]);
      const double* s = sums.data() + (it * R + r) * n;
      for (std::size_t j = 0; j < n; ++j) {
        if (!mask[r][j]) continue;
        gap = std::max(gap, w * std::pow(s[j] / M, 1.0 / pp));
      }
    }
    res.gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < res.gaps.size(); ++i) {
    res.ratios.push_back(res.gaps[i - 1] > 0.0 ? res.gaps[i] / res.gaps[i - 1] : 0.0);
  }
  return res;
}

MomentCurve estimate_moments(const SheConfig& config, int p, std::size_t M) {
  require(p >= 1, ErrorCode::InvalidArgument, "moment order must be positive");
  require(M >= 2, ErrorCode::InvalidArgument, "at least two paths are required");
  if (M < 100) spdlog::warn("moment curve from only {} paths; published estimates need M >= 100", M);
  const Plan pl = make_plan(config);
  const double tau = tau_for(config);
  const std::size_t n = pl.g.n;
  const std::size_t R = pl.rec_steps.size();
  const auto mask = significant_mask(pl, tau);
  const double pp = static_cast<double>(p);

  auto ratio_pow = [&](double u, std::size_t r, std::size_t j) {
    return std::pow(std::abs(u) / (tau + pl.reference[r][j]), pp);
  };

  // Pass 1: E|u / (tau + p * mu)|^p on every recorded (t, x).
  const auto sums = block_reduce(M, R * n, config.threads, [&](std::size_t path,
                                                                std::vector<double>& acc) {
    const std::uint64_t seed = stream_seed(config.seed, path);
    Rng rng(seed);
    PathBuffers buf;
    std::size_t next = 0;
    run_path(pl, &rng, nullptr, false, seed, buf, [&](std::size_t k, std::span<const double> u) {
      if (next < R && pl.rec_steps[next] == k) {
        for (std::size_t j = 0; j < n; ++j) acc[next * n + j] += ratio_pow(u[j], next, j);
        ++next;
      }
    });
  });

  MomentCurve curve;
  curve.M = M;
  curve.p = p;
  curve.tau = tau;
  curve.seed = config.seed;
  std::vector<std::size_t> arg(R, 0);
  std::vector<double> val(R, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    double best = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask[r][j]) continue;
      const double v = sums[r * n + j] / static_cast<double>(M);
      if (v > best) {
        best = v;
        arg[r] = j;
      }
    }
    val[r] = std::pow(std::max(best, 0.0), 1.0 / pp);
  }

  // Pass 2: replay the same seeds and keep each path's value at the maximizer.
  std::vector<std::vector<double>> samples(R, std::vector<double>(M, 0.0));
  parallel_for(M, config.threads, [&](std::size_t path) {
    const std::uint64_t seed = stream_seed(config.seed, path);
    Rng rng(seed);
    PathBuffers buf;
    std::size_t next = 0;
    run_path(pl, &rng, nullptr, false, seed, buf, [&](std::size_t k, std::span<const double> u) {
      if (next < R && pl.rec_steps[next] == k) {
        samples[next][path] = ratio_pow(u[arg[next]], next, arg[next]);
        ++next;
      }
    });
  });

  Rng boot(stream_seed(config.seed, std::uint64_t{1} << 62));
  std::vector<std::vector<double>> reps(R, std::vector<double>(kBootstrap));
  std::vector<std::size_t> pick(M);
  for (int b = 0; b < kBootstrap; ++b) {
    for (auto& i : pick) i = boot.index(M);
    for (std::size_t r = 1; r < R; ++r) {
      double s = 0.0;
      for (auto i : pick) s += samples[r][i];
      reps[r][static_cast<std::size_t>(b)] = std::pow(s / static_cast<double>(M), 1.0 / pp);
    }
  }

  // t = 0 is excluded: the normalization is singular there for atomic data.
  for (std::size_t r = 1; r < R; ++r) {
    curve.times.push_back(pl.times[r]);
    curve.values.push_back(val[r]);
    curve.stderr_.push_back(stdev(reps[r]));
    curve.argmax_x.push_back(pl.g.x(arg[r]));
    curve.samples.push_back(std::move(samples[r]));
  }
  return curve;
}

double weighted_norm(const MomentCurve& curve, double beta) {
  require(!curve.times.empty() && curve.times.size() == curve.values.size(),
          ErrorCode::InvalidArgument, "moment curve is empty");
  double best = 0.0;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    best = std::max(best, std::exp(-beta * curve.times[i]) * curve.values[i]);
  }
  return best;
}

GammaEstimate estimate_gamma_bar(const MomentCurve& curve, double t_lo, double t_hi) {
  require(curve.times.size() == curve.values.size(), ErrorCode::InvalidArgument,
          "moment curve is inconsistent");
  const double slack = 1e-12 * std::max(std::abs(t_hi), 1.0);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] >= t_lo - slack && curve.times[i] <= t_hi + slack) idx.push_back(i);
  }
  require(idx.size() >= 5, ErrorCode::InvalidArgument,
          "degenerate fit window: " + std::to_string(idx.size()) + " curve points in [" +
              fmt_double(t_lo) + ", " + fmt_double(t_hi) + "], need 5");
  std::vector<double> t, y;
  for (auto i : idx) {
    require(curve.values[i] > 0.0, ErrorCode::InvalidArgument,
            "degenerate fit window: nonpositive curve value at t=" + fmt_double(curve.times[i]));
    t.push_back(curve.times[i]);
    y.push_back(std::log(curve.values[i]));
  }
  GammaEstimate g;
  g.points = idx.size();
  g.slope = ols_slope(t, y, &g.intercept);

  const bool have_paths = curve.samples.size() == curve.times.size() && curve.M >= 2 &&
                          std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
                            return curve.samples[i].size() == curve.M;
                          });
  if (have_paths) {
    // Path bootstrap: one resample of paths drives every window time, so the
    // strong correlation along the curve is kept.
    g.path_bootstrap = true;
    Rng boot(stream_seed(curve.seed, std::uint64_t{1} << 61));
    std::vector<std::size_t> pick(curve.M);
    std::vector<double> slopes, yb(idx.size());
    const double inv_p = 1.0 / static_cast<double>(curve.p);
    for (int b = 0; b < kBootstrap; ++b) {
      for (auto& i : pick) i = boot.index(curve.M);
      bool ok = true;
      for (std::size_t w = 0; w < idx.size(); ++w) {
        double s = 0.0;
        for (auto i : pick) s += curve.samples[idx[w]][i];
        if (!(s > 0.0)) {
          ok = false;
          break;
        }
        yb[w] = inv_p * std::log(s / static_cast<double>(curve.M));
      }
      if (ok) slopes.push_back(ols_slope(t, yb, nullptr));
    }
    g.ci = 1.96 * stdev(slopes);
  } else {
    // Independent errors propagated through the least-squares weights.
    double tb = 0.0;
    for (double x : t) tb += x;
    tb /= static_cast<double>(t.size());
    double sxx = 0.0;
    for (double x : t) sxx += (x - tb) * (x - tb);
    double var = 0.0;
    for (std::size_t w = 0; w < idx.size(); ++w) {
      const std::size_t i = idx[w];
      const double se = i < curve.stderr_.size() ? curve.stderr_[i] / curve.values[i] : 0.0;
      const double c = (t[w] - tb) / sxx;
      var += c * c * se * se;
    }
    g.ci = 1.96 * std::sqrt(var);
  }
  return g;
}

GammaEstimate estimate_gamma_bar(const MomentCurve& curve) {
  require(!curve.times.empty(), ErrorCode::InvalidArgument, "moment curve is empty");
  const double T = curve.times.back();
  return estimate_gamma_bar(curve, 0.5 * T, T);
}

bounds::BoundParams bound_params(const SheConfig& config, int p) {
  bounds::BoundParams bp;
  bp.L_b = config.b.lipschitz();
  bp.L_sigma = config.sigma.lipschitz();
  bp.b0 = config.b(0.0);
  bp.sigma0 = config.sigma(0.0);
  bp.p = p;
  bp.d = 1;
  return bp;
}

MomentVerdict verify_moment_bound(const SheConfig& config, int p, std::size_t M, double tol,
                                  const bounds::UpsilonOptions& opt) {
  require(std::isfinite(tol) && tol >= 0.0, ErrorCode::InvalidArgument,
          "tolerance must be >= 0");
  MomentVerdict v;
  v.tol = tol;
  v.critical = bounds::critical_beta(bound_params(config, p), config.phi, config.cov, 1e-6, 1e4, opt);
  v.beta_star = v.critical.beta;
  v.curve = estimate_moments(config, p, M);
  v.gamma = estimate_gamma_bar(v.curve);
  v.gamma_hat = v.gamma.slope;
  v.ci = v.gamma.ci;
  v.holds = v.gamma_hat <= v.beta_star + v.ci + tol;
  spdlog::info("moment bound: gamma_hat={} ci={} beta*={} -> {}", v.gamma_hat, v.ci, v.beta_star,
               v.holds ? "HOLDS" : "FAILED");
  return v;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,u,reference\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    for (std::size_t j = 0; j < traj.grid.n; ++j) {
      out << fmt_double(traj.times[r]) << ',' << fmt_double(traj.grid.x(j)) << ','
          << fmt_double(traj.fields[r][j]) << ',' << fmt_double(traj.reference[r][j]) << '\n';
    }
  }
}

void write_moment_csv(std::ostream& out, const MomentCurve& curve) {
  out << "t,value,stderr,M,p\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << fmt_double(curve.times[i]) << ',' << fmt_double(curve.values[i]) << ','
        << fmt_double(curve.stderr_[i]) << ',' << curve.M << ',' << curve.p << '\n';
  }
}

}  // namespace shelab::sim
