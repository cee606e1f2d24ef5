// Acceptance suite: `acceptance <id>` runs criterion id (1..11) or `all`.
// Each check prints one line; the last line per criterion is its verdict.
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "shelab/bounds.hpp"
#include "shelab/bridge.hpp"
#include "shelab/error.hpp"
#include "shelab/levy.hpp"
#include "shelab/simulator.hpp"
#include "shelab/spectral.hpp"

using namespace shelab;
using std::numbers::pi;

namespace {

struct Report {
  int id;
  bool ok = true;
  void check(bool pass, const std::string& what) {
    std::printf("  [%s] %s\n", pass ? "pass" : "FAIL", what.c_str());
    ok = ok && pass;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

levy::LevyExponent half_laplacian() { return levy::make_stable_exponent(2.0, 0.0, 0.5, 1); }
levy::LevyExponent stable15() { return levy::make_stable_exponent(1.5, 0.0, 1.0, 1); }

double gaussian_pdf(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * pi * var);
}

// (1/pi) int_0^inf exp(-t C xi^a) cos(xi x) d xi, plain adaptive Gauss-Kronrod.
double stable_density_oracle(double a, double scale, double t, double x) {
  auto f = [&](double xi) { return std::exp(-t * scale * std::pow(xi, a)) * std::cos(xi * x); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
             f, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-14, &err) /
         pi;
}

// Probabilists' Hermite polynomial by the three-term recurrence.
double hermite_he(int p, double x) {
  double a = 1.0, b = x;
  if (p == 0) return a;
  for (int k = 1; k < p; ++k) {
    const double c = x * b - k * a;
    a = b;
    b = c;
  }
  return b;
}

sim::SheConfig pam_config() {
  sim::SheConfig c(half_laplacian(), spectral::Covariance::white(1),
                   levy::InitialMeasure::lebesgue());
  c.grid = GridSpec{8.0, 128, 1};
  c.sigma = sim::Coefficient::affine(0.0, 1.0);
  c.T = 10.0;
  c.dt = 5e-3;
  c.seed = 20240601;
  return c;
}

sim::SheConfig drift_config(double lambda, double T, double dt) {
  sim::SheConfig c(half_laplacian(), spectral::Covariance::white(1),
                   levy::InitialMeasure::lebesgue());
  c.grid = GridSpec{4.0, 16, 1};
  c.b = sim::Coefficient::affine(0.0, lambda);
  c.T = T;
  c.dt = dt;
  return c;
}

// ---- criteria

void kernel_oracle(Report& r) {
  const GridSpec grid{8.0, 1024, 1};
  const auto k = levy::transition_density(half_laplacian(), 1.0, grid);
  double err = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    err = std::max(err, std::abs(k.values[j] - gaussian_pdf(grid.x(j), 1.0)));
  }
  r.check(err < 1e-8, "Gaussian t=1, 1024 points: max error " + num(err) + " < 1e-8");

  const auto phi = stable15();
  const double oracle = stable_density_oracle(1.5, 1.0, 1.0, 0.0);
  const double direct = levy::density_at(phi, 1.0, 0.0);
  r.check(std::abs(direct - oracle) < 1e-8,
          "a=1.5 p_1(0) = " + num(direct) + " vs quadrature " + num(oracle) + ": error " +
              num(std::abs(direct - oracle)));
  const GridSpec wide{1024.0, 8192, 1};
  const double lattice = levy::transition_density(phi, 1.0, wide).values[wide.n / 2];
  r.check(std::abs(lattice - oracle) < 1e-8,
          "a=1.5 lattice inversion at 0: error " + num(std::abs(lattice - oracle)));
}

void semigroup(Report& r) {
  const std::pair<const char*, levy::LevyExponent> exps[] = {{"Gaussian", half_laplacian()},
                                                             {"a=1.5", stable15()}};
  for (const auto& [name, phi] : exps) {
    for (auto [t, s] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}}) {
      // Nyquist resolves exp(-min(t,s) Phi) to rounding on both lattices.
      const GridSpec grid{name == std::string("Gaussian") ? 16.0 : 64.0, 1024, 1};
      const double d = levy::semigroup_defect(phi, t, s, grid);
      r.check(d < 1e-6, std::string(name) + " (t,s)=(" + num(t) + "," + num(s) + "): defect " +
                            num(d) + " < 1e-6");
    }
  }
}

void parseval_suite(Report& r) {
  const GridSpec grid{12.0, 1024, 1};
  std::vector<double> v(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) v[j] = gaussian_pdf(grid.x(j), 1.0);
  const std::pair<const char*, levy::InitialMeasure> measures[] = {
      {"delta_0", levy::InitialMeasure::dirac(0.0)},
      {"N(0,1)", levy::InitialMeasure::density(grid, v)},
      {"two-atom", levy::InitialMeasure::atoms({{-1.0, 0.5}, {0.5, 2.0}})}};
  const std::pair<const char*, spectral::Covariance> covs[] = {
      {"GaussianBump", spectral::Covariance::gaussian_bump(1.0, 1)},
      {"Riesz 1/2", spectral::Covariance::riesz(0.5, 1)}};
  for (const auto& [cn, cov] : covs) {
    for (const auto& [mn, nu] : measures) {
      const auto p = spectral::parseval_check(cov, nu);
      const std::string label = std::string(cn) + " x " + mn + ": ";
      if (p.both_divergent) {
        r.check(std::isinf(p.lhs) && std::isinf(p.rhs),
                label + "both sides infinite (atom at distance 0 against |x|^-1/2)");
      } else {
        r.check(p.rel_err < 1e-4, label + "lhs " + num(p.lhs) + " rhs " + num(p.rhs) +
                                      " rel_err " + num(p.rel_err));
      }
    }
  }
  // Independent closed forms for the finite cases.
  const auto bump = spectral::Covariance::gaussian_bump(1.0, 1);
  const double two_atom = 0.25 + 4.0 + 2.0 * 0.5 * 2.0 * std::exp(-1.5 * 1.5 / 2.0);
  r.check(std::abs(spectral::parseval_check(
                       bump, levy::InitialMeasure::atoms({{-1.0, 0.5}, {0.5, 2.0}}))
                       .rhs -
                   two_atom) < 1e-4 * two_atom,
          "bump x two-atom frequency side vs closed form " + num(two_atom));
  const double riesz_gauss = std::tgamma(0.25) / (std::sqrt(pi) * std::pow(4.0, 0.25));
  const double got =
      spectral::parseval_check(spectral::Covariance::riesz(0.5, 1),
                               levy::InitialMeasure::density(grid, v))
          .rhs;
  r.check(std::abs(got - riesz_gauss) < 1e-4 * riesz_gauss,
          "Riesz x N(0,1) frequency side vs E|Z|^-1/2, Z~N(0,2) = " + num(riesz_gauss));
}

void bridge_suite(Report& r) {
  const auto rows = bridge::run_matrix(bridge::standard_matrix());
  std::size_t held = 0, gauss_held = 0, gauss_total = 0;
  double worst = 0.0;
  for (const auto& row : rows) {
    held += row.bound.holds;
    if (row.c.exponent == "gaussian") {
      ++gauss_total;
      gauss_held += row.bound.holds;
    }
    worst = std::max(worst, row.bound.ratio);
  }
  r.check(gauss_held == gauss_total, "Gaussian verdicts: " + std::to_string(gauss_held) + "/" +
                                         std::to_string(gauss_total) + " hold");
  r.check(held == rows.size(), "all verdicts: " + std::to_string(held) + "/" +
                                   std::to_string(rows.size()) + " hold (worst ratio " +
                                   num(worst) + ")");
  const std::pair<const char*, levy::LevyExponent> exps[] = {{"Gaussian", half_laplacian()},
                                                             {"a=1.5", stable15()}};
  for (const auto& [name, phi] : exps) {
    double err = 0.0;
    for (auto [s, t] : {std::pair{0.5, 1.0}, std::pair{0.1, 1.0}, std::pair{1.0, 2.0}}) {
      const bridge::BridgeSpec spec{phi, -1.0, 0.5, t, s};
      const auto cf =
          bridge::check_cf_consistency(spec, bridge::bridge_grid(phi, t, s, {-1.0, 0.5}));
      err = std::max(err, cf.max_error());
    }
    r.check(err < 1e-6, std::string(name) + " bridge CF vs density transform: max error " +
                            num(err) + " < 1e-6");
  }
}

void dalang(Report& r) {
  const auto phi = half_laplacian();
  const auto white = spectral::Covariance::white(1);
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double want = std::sqrt(2.0) * pi / std::sqrt(beta);
    const auto t = bounds::upsilon_tilde(phi, white, beta);
    const double rel = std::abs(t.value - want) / want;
    r.check(rel < 1e-6, "tilde(beta=" + num(beta) + ") = " + num(t.value) + " vs sqrt2 pi/sqrt(beta) = " +
                            num(want) + ", rel " + num(rel));
  }
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double want = pi / std::sqrt(2.0 * beta);
    const auto u = bounds::upsilon(phi, white, beta);
    const double rel = std::abs(u.value - want) / want;
    double excess = 0.0;
    for (const auto& pt : u.grid) excess = std::max(excess, pt.value / want - 1.0);
    r.check(rel < 1e-4, "upsilon(beta=" + num(beta) + ") = " + num(u.value) +
                            " vs pi/sqrt(2 beta) = " + num(want) + ", rel " + num(rel));
    r.check(excess < 1e-8, "upsilon(beta=" + num(beta) + ") t-grid excess over the limit " +
                               num(excess) + " (sup at t=" + num(u.t_star) + ")");
  }
}

void hermite(Report& r) {
  const double want[] = {1.0, std::sqrt(3.0), std::sqrt(3.0 + std::sqrt(6.0))};
  for (int p = 2; p <= 4; ++p) {
    const double z = bounds::hermite_largest_zero(p);
    const double err = std::abs(z - want[p - 2]);
    r.check(err < 1e-10, "z_" + std::to_string(p) + " = " + num(z) + ", error " + num(err));
  }
  bool interlace = true, monotone = true, roots = true;
  auto prev = bounds::hermite_zeros(2);
  for (int p = 3; p <= 50; ++p) {
    auto z = bounds::hermite_zeros(p);
    std::sort(z.begin(), z.end());
    std::sort(prev.begin(), prev.end());
    if (z.size() != static_cast<std::size_t>(p)) interlace = false;
    for (std::size_t i = 0; i + 1 < z.size() && interlace; ++i) {
      if (!(z[i] < prev[i] && prev[i] < z[i + 1])) interlace = false;
    }
    if (!(bounds::hermite_largest_zero(p) > bounds::hermite_largest_zero(p - 1))) monotone = false;
    // Sign change of He_p across the largest zero.
    const double zp = z.back(), d = 1e-9 * zp;
    if (hermite_he(p, zp - d) * hermite_he(p, zp + d) > 0.0) roots = false;
    prev = std::move(z);
  }
  r.check(interlace, "zeros of He_p and He_(p+1) interlace for p < 50");
  r.check(monotone, "z_p strictly increasing for p <= 50");
  r.check(roots, "He_p changes sign across z_p (recurrence oracle) for p <= 50");
}

void critical(Report& r) {
  const auto phi = half_laplacian();
  const auto white = spectral::Covariance::white(1);
  const double tol = 1e-6;
  const auto drift = bounds::critical_beta({1.0, 0.0, 0.0, 0.0, 2, 1}, phi, white, tol);
  r.check(std::abs(drift.beta - 1.0) <= 1e-6,
          "L_b=1, L_sigma=0: beta* = " + num(drift.beta) + ", |beta*-1| = " +
              num(std::abs(drift.beta - 1.0)));
  struct Case {
    const char* name;
    bounds::BoundParams params;
  };
  const Case cases[] = {{"drift L_b=1", {1.0, 0.0, 0.0, 0.0, 2, 1}},
                        {"drift L_b=0.5", {0.5, 0.0, 0.0, 0.0, 2, 1}},
                        {"PAM p=2", {0.0, 1.0, 0.0, 0.0, 2, 1}},
                        {"L_b=L_sigma=1 p=3", {1.0, 1.0, 0.0, 0.0, 3, 1}}};
  for (const auto& c : cases) {
    const auto cb = bounds::critical_beta(c.params, phi, white, tol);
    const double Blo = bounds::bound_constant(cb.lower, c.params, phi, white).B;
    const double Bhi = bounds::bound_constant(cb.upper, c.params, phi, white).B;
    const bool cert = Blo >= 1.0 && Bhi < 1.0 && cb.upper - cb.lower <= tol * cb.upper * 1.0000001;
    r.check(cert, std::string(c.name) + ": bracket [" + num(cb.lower) + ", " + num(cb.upper) +
                      "], B = " + num(Blo) + " / " + num(Bhi));
  }
}

void solver(Report& r) {
  auto max_err = [](const sim::SheConfig& c, const std::function<double(double)>& exact) {
    Rng rng(1);
    const auto tr = sim::solve_mild(c, rng);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      for (double u : tr.fields[k]) err = std::max(err, std::abs(u - exact(tr.times[k])));
    }
    return err;
  };
  auto constant = drift_config(0.0, 2.0, 1e-3);
  constant.b = sim::Coefficient::affine(0.3, 0.0);
  const double ec = max_err(constant, [](double t) { return 1.0 + 0.3 * t; });
  r.check(ec < 1e-3, "b = 0.3: max |u - (1 + 0.3 t)| = " + num(ec));
  auto lin = [&](double dt) {
    return max_err(drift_config(0.5, 2.0, dt), [](double t) { return std::exp(0.5 * t); });
  };
  const double e1 = lin(1e-3), e2 = lin(5e-4), e3 = lin(2.5e-4);
  r.check(e1 < 1e-3, "b(u) = 0.5 u, dt=1e-3: max |u - e^(t/2)| = " + num(e1));
  r.check(std::abs(e1 / e2 - 2.0) < 0.1 && std::abs(e2 / e3 - 2.0) < 0.1,
          "error ratios on halving dt: " + num(e1 / e2) + ", " + num(e2 / e3));
}

void picard(Report& r) {
  auto c = pam_config();
  const auto params = sim::bound_params(c, 2);
  const auto cb = bounds::critical_beta(params, c.phi, c.cov, 1e-6);
  const double beta = 1.5 * cb.beta;
  const double B = bounds::bound_constant(beta, params, c.phi, c.cov).B;
  const auto res = sim::picard_iterate(c, 6, beta, 2, 200);
  r.check(res.paths >= 200, "ensemble of " + std::to_string(res.paths) + " frozen-noise paths");
  std::string list;
  bool ok = res.ratios.size() == 5;
  for (double q : res.ratios) {
    list += num(q) + " ";
    ok = ok && q <= 1.1 * B;
  }
  r.check(ok, "beta = 1.5 beta* = " + num(beta) + ", B = " + num(B) + ", ratios " + list +
                  "<= 1.1 B = " + num(1.1 * B));
}

void verdicts(Report& r) {
  {
    const auto v = sim::verify_moment_bound(drift_config(0.5, 10.0, 1e-3), 2, 2, 1e-2);
    r.check(v.holds && std::abs(v.beta_star - 0.5) < 1e-6 && std::abs(v.gamma_hat - 0.5) < 1e-2,
            "drift lambda=0.5: gamma_hat " + num(v.gamma_hat) + ", ci " + num(v.ci) + ", beta* " +
                num(v.beta_star) + (v.holds ? ", holds" : ", FAILED"));
  }
  {
    const auto v = sim::verify_moment_bound(pam_config(), 2, 1000, 1e-2);
    r.check(v.holds, "PAM p=2, T=10, M=1000: gamma_hat " + num(v.gamma_hat) + ", ci " +
                         num(v.ci) + ", beta* " + num(v.beta_star) +
                         (v.holds ? ", holds" : ", FAILED"));
  }
  {
    sim::SheConfig c(half_laplacian(), spectral::Covariance::white(1),
                     levy::InitialMeasure::dirac(0.0));
    c.grid = GridSpec{16.0, 256, 1};
    c.T = 4.0;
    c.dt = 5e-3;
    const auto v = sim::verify_moment_bound(c, 2, 2, 1e-2);
    r.check(v.holds && v.gamma_hat <= 1e-9,
            "sigma=0, b=0: gamma_hat " + num(v.gamma_hat) + ", beta* " + num(v.beta_star) +
                (v.holds ? ", holds" : ", FAILED"));
  }
}

std::string serialize(const sim::SheConfig& c) {
  std::ostringstream out;
  const auto v = sim::verify_moment_bound(c, 2, 100, 1e-2);
  sim::write_moment_csv(out, v.curve);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", v.gamma_hat, v.ci, v.beta_star,
                v.holds ? 1 : 0);
  out << buf;
  Rng rng(c.seed);
  sim::write_trajectory_csv(out, sim::solve_mild(c, rng));
  return out.str();
}

void reproducibility(Report& r) {
  auto c = pam_config();
  c.T = 2.0;
  c.threads = 1;
  const auto a = serialize(c);
  const auto b = serialize(c);
  c.threads = 4;
  const auto d = serialize(c);
  r.check(a == b, "two verify runs, seed " + std::to_string(c.seed) + ": " +
                      std::to_string(a.size()) + " bytes, identical = " + (a == b ? "yes" : "no"));
  r.check(a == d, "1 vs 4 threads: identical = " + std::string(a == d ? "yes" : "no"));
  c.seed += 1;
  r.check(serialize(c) != a, "a different seed changes the artifacts");
}

struct Criterion {
  const char* title;
  double budget_s;
  void (*run)(Report&);
};

const Criterion kCriteria[] = {
    {"kernel oracle", 5, kernel_oracle},
    {"semigroup", 10, semigroup},
    {"Parseval suite", 30, parseval_suite},
    {"bridge bound suite", 120, bridge_suite},
    {"Dalang integrals", 60, dalang},
    {"Hermite zeros", 1, hermite},
    {"critical beta", 60, critical},
    {"deterministic solver", 30, solver},
    {"Picard contraction", 600, picard},
    {"moment bound verdicts", 1200, verdicts},
    {"reproducibility", 60, reproducibility},
};

bool run_one(int id) {
  const auto& c = kCriteria[id - 1];
  std::printf("criterion %d: %s\n", id, c.title);
  Report r{id};
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.check(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.check(secs < c.budget_s, "runtime " + num(secs) + " s < " + num(c.budget_s) + " s");
  std::printf("criterion %d: %s\n", id, r.ok ? "PASS" : "FAIL");
  std::fflush(stdout);
  return r.ok;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::string arg = argc > 1 ? argv[1] : "all";
  bool ok = true;
  if (arg == "all") {
    for (int id = 1; id <= 11; ++id) ok = run_one(id) && ok;
  } else {
    const int id = std::atoi(arg.c_str());
    if (id < 1 || id > 11) {
      std::fprintf(stderr, "usage: acceptance <1..11 | all>\n");
      return 64;
    }
    ok = run_one(id);
  }
  return ok ? 0 : 1;
}
