#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "shelab/error.hpp"
#include "shelab/levy.hpp"

using namespace shelab;
using namespace shelab::levy;
using std::numbers::pi;

namespace {

LevyExponent half_laplacian() { return make_stable_exponent(2.0, 0.0, 0.5, 1); }

double gaussian_pdf(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * pi * var);
}

// Oracle: (1/pi) int_0^inf exp(-t C xi^a) cos(xi x) d xi by plain Gauss-Kronrod.
double stable_density_oracle(double a, double scale, double t, double x) {
  auto f = [&](double xi) { return std::exp(-t * scale * std::pow(xi, a)) * std::cos(xi * x); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
             f, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-14, &err) /
         pi;
}

}  // namespace

TEST_CASE("stable exponent construction and evaluation") {
  const auto lap = half_laplacian();
  CHECK(lap.family() == Family::BrownianHalfLaplacian);
  CHECK(lap.at(0.0) == std::complex<double>(0.0, 0.0));
  CHECK(lap.at(2.0).real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lap.at(2.0).imag() == 0.0);

  const auto st = make_stable_exponent(1.5, 0.0, 1.0, 1);
  CHECK(st.at(1.0).real() == doctest::Approx(1.0));
  CHECK(st.at(2.0).real() == doctest::Approx(std::pow(2.0, 1.5)));
  CHECK(st.at(-3.0).real() == doctest::Approx(5.196152422706632));
  CHECK(st.at(-3.0) == std::conj(st.at(3.0)));
  CHECK(st.homogeneity().value() == 1.5);

  CHECK_THROWS_AS(make_stable_exponent(1.5, 0.6, 1.0, 1), Error);
  CHECK_THROWS_AS(make_stable_exponent(1.5, -0.5, 1.0, 1), Error);
  CHECK_THROWS_AS(make_stable_exponent(1.0, 0.0, 1.0, 1), Error);
  CHECK_THROWS_AS(make_stable_exponent(2.5, 0.0, 1.0, 1), Error);
  CHECK_THROWS_AS(make_stable_exponent(1.5, 0.2, 1.0, 2), Error);
  CHECK_THROWS_AS(make_stable_exponent(1.5, 0.0, -1.0, 1), Error);
  CHECK_NOTHROW(make_stable_exponent(1.5, 0.0, 1.0, 3));
}

TEST_CASE("exponent invariants hold on random frequencies") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ua(1.05, 2.0), ut(-0.9, 0.9), ux(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = ua(gen);
    const double theta = ut(gen) * (2.0 - a);
    const double c = 0.1 + std::abs(ut(gen));
    const auto phi = make_stable_exponent(a, theta, c, 1);
    const double xi = ux(gen);
    const auto v = phi.at(xi);
    CHECK(v.real() >= 0.0);
    CHECK(std::abs(phi.at(-xi) - std::conj(v)) <= 1e-12 * (1.0 + std::abs(v)));
    // Degree-a homogeneity of Re Phi.
    CHECK(phi.at(2.0 * xi).real() == doctest::Approx(std::pow(2.0, a) * v.real()).epsilon(1e-12));
    CHECK(phi.at(0.0) == std::complex<double>(0.0, 0.0));
  }
}

TEST_CASE("multidimensional exponent is isotropic") {
  const auto phi = make_stable_exponent(1.5, 0.0, 1.0, 2);
  const double a[] = {3.0, 4.0};
  const double b[] = {5.0, 0.0};
  CHECK(phi(a).real() == doctest::Approx(phi(b).real()));
  const double wrong[] = {1.0};
  CHECK_THROWS_AS(phi(wrong), Error);
}

TEST_CASE("tabulated exponent interpolates and refuses to extrapolate") {
  const auto tab = LevyExponent::tabulated({0.0, 1.0, 2.0}, {{0, 0}, {1, 0.5}, {4, 1.0}});
  CHECK(tab.at(1.5).real() == doctest::Approx(2.5));
  CHECK(tab.at(-1.5) == std::conj(tab.at(1.5)));
  CHECK_THROWS_AS(tab.at(2.5), Error);
  CHECK_THROWS_AS(LevyExponent::tabulated({0.0, 1.0}, {{1, 0}, {1, 0}}), Error);
  CHECK_THROWS_AS(LevyExponent::tabulated({0.0, 1.0}, {{0, 0}, {-1, 0}}), Error);
}

TEST_CASE("integrability of exp(-t Re Phi)") {
  const double t1[] = {1.0};
  auto rows = check_integrability(half_laplacian(), t1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].finite());
  CHECK(rows[0].value == doctest::Approx(std::sqrt(2.0 * pi)).epsilon(1e-10));

  const double small[] = {0.01};
  rows = check_integrability(make_stable_exponent(1.5, 0.0, 1.0, 1), small);
  CHECK(rows[0].finite());
  // int exp(-t |xi|^a) = 2 Gamma(1 + 1/a) t^{-1/a}
  CHECK(rows[0].value == doctest::Approx(2.0 * std::tgamma(1.0 + 1.0 / 1.5) *
                                         std::pow(0.01, -1.0 / 1.5))
                             .epsilon(1e-9));

  std::vector<double> xi(101);
  std::vector<std::complex<double>> zero(101);
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = 0.5 * static_cast<double>(i);
  rows = check_integrability(LevyExponent::tabulated(xi, zero), t1);
  CHECK(rows[0].status == quad::Status::Divergent);

  // d = 2: int exp(-t |xi|^2/2) = 2 pi / t
  const double t2[] = {2.0};
  rows = check_integrability(make_stable_exponent(2.0, 0.0, 0.5, 2), t2);
  CHECK(rows[0].value == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("Gaussian transition density matches the closed form") {
  const GridSpec grid{8.0, 1024, 1};
  const auto k = transition_density(half_laplacian(), 1.0, grid);
  double err = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    err = std::max(err, std::abs(k.values[j] - gaussian_pdf(grid.x(j), 1.0)));
  }
  CHECK(err < 1e-12);
  CHECK(k.values[grid.n / 2] == doctest::Approx(0.398942280401433).epsilon(1e-12));
  CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-12));
  // Symmetry: x_j -> -x_j maps j -> n - j.
  for (std::size_t j = 1; j < grid.n; ++j) {
    CHECK(std::abs(k.values[j] - k.values[grid.n - j]) < 1e-15);
  }
}

TEST_CASE("stable density at the origin matches direct quadrature") {
  const auto phi = make_stable_exponent(1.5, 0.0, 1.0, 1);
  const GridSpec grid{1024.0, 8192, 1};
  const auto k = transition_density(phi, 1.0, grid);
  const double oracle = stable_density_oracle(1.5, 1.0, 1.0, 0.0);
  CHECK(oracle == doctest::Approx(std::tgamma(5.0 / 3.0) / pi).epsilon(1e-13));
  CHECK(std::abs(k.values[grid.n / 2] - oracle) < 1e-8);
  CHECK(std::abs(density_at(phi, 1.0, 0.0) - oracle) < 1e-12);
  CHECK(std::abs(density_at(phi, 1.0, 2.5) - stable_density_oracle(1.5, 1.0, 1.0, 2.5)) < 1e-12);
}

TEST_CASE("symmetric stable scaling p_t(x) = t^{-1/a} p_1(t^{-1/a} x)") {
  const double a = 1.5;
  const auto phi = make_stable_exponent(a, 0.0, 1.0, 1);
  const GridSpec grid{512.0, 8192, 1};
  for (double t : {0.5, 2.0}) {
    const auto k = transition_density(phi, t, grid);
    double err = 0.0;
    for (std::size_t j = grid.n / 2 - 40; j <= grid.n / 2 + 40; j += 4) {
      const double s = std::pow(t, -1.0 / a);
      err = std::max(err, std::abs(k.values[j] - s * density_at(phi, 1.0, s * grid.x(j))));
    }
    CHECK(err < 1e-7);
  }
}

TEST_CASE("skewed density is a probability density consistent with direct inversion") {
  const auto phi = make_stable_exponent(1.5, 0.3, 1.0, 1);
  const GridSpec grid{256.0, 4096, 1};
  const auto k = transition_density(phi, 1.0, grid);
  CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-6));
  for (double x : {-3.0, 0.0, 2.0}) {
    const auto j = static_cast<std::size_t>((x + grid.half_extent) / grid.spacing());
    CHECK(std::abs(k.values[j] - density_at(phi, 1.0, grid.x(j))) < 1e-6);
  }
  // Skewness breaks the x -> -x symmetry.
  const auto j = static_cast<std::size_t>((1.0 + grid.half_extent) / grid.spacing());
  CHECK(std::abs(k.values[j] - k.values[grid.n - j]) > 1e-4);
}

TEST_CASE("Chapman-Kolmogorov holds exactly in Fourier space") {
  const auto phi = make_stable_exponent(1.5, 0.2, 1.0, 1);
  const GridSpec grid{64.0, 1024, 1};
  const auto a = transition_density(phi, 0.5, grid);
  const auto b = transition_density(phi, 0.7, grid);
  const auto c = transition_density(phi, 1.2, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    err = std::max(err, std::abs(a.fourier[k] * b.fourier[k] - c.fourier[k]));
  }
  CHECK(err < 1e-14);
}

TEST_CASE("semigroup defect on lattices") {
  const GridSpec grid{16.0, 1024, 1};
  CHECK(semigroup_defect(half_laplacian(), 0.5, 0.5, grid) < 1e-8);
  CHECK(semigroup_defect(half_laplacian(), 1.0, 2.0, grid) < 1e-8);
  const GridSpec wide{64.0, 1024, 1};
  CHECK(semigroup_defect(make_stable_exponent(1.5, 0.0, 1.0, 1), 1.0, 1.0, wide) < 1e-6);
}

TEST_CASE("resolution and extent guards") {
  // Nyquist pi / 1 is far too low for t = 0.01.
  CHECK_THROWS_AS(transition_density(half_laplacian(), 0.01, GridSpec{8.0, 16, 1}), Error);
  try {
    transition_density(half_laplacian(), 0.01, GridSpec{8.0, 16, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resolution);
  }
  const auto k = transition_density(half_laplacian(), 1.0, GridSpec{8.0, 256, 1});
  try {
    convolve_initial(k, InitialMeasure::dirac(9.0));
    FAIL("expected an extent error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Extent);
  }
}

TEST_CASE("default grid honours the mass budget policy") {
  const auto g = default_grid(half_laplacian(), 1.0);
  CHECK(g.half_extent == doctest::Approx(8.0));
  const auto k = transition_density(half_laplacian(), 1.0, g);
  CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-9));
  const auto gs = default_grid(make_stable_exponent(1.5, 0.0, 1.0, 1), 1.0);
  CHECK(gs.half_extent > 1e5);
  CHECK(gs.nyquist() > std::pow(std::log(1e12), 1.0 / 1.5));
}

TEST_CASE("convolution with initial measures") {
  const GridSpec grid{16.0, 1024, 1};
  const auto k = transition_density(half_laplacian(), 1.0, grid);
  const auto mid = grid.n / 2;

  auto d0 = convolve_initial(k, InitialMeasure::dirac(0.0));
  CHECK(d0[mid] == doctest::Approx(0.398942280401433).epsilon(1e-12));

  auto leb = convolve_initial(k, InitialMeasure::lebesgue());
  for (double v : leb) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  auto two = convolve_initial(k, InitialMeasure::atoms({{0.0, 1.0}, {1.0, 1.0}}));
  CHECK(two[mid] == doctest::Approx((1.0 + std::exp(-0.5)) / std::sqrt(2.0 * pi)).epsilon(1e-12));
  CHECK(two[mid] == doctest::Approx(0.640913).epsilon(1e-6));

  // Off-lattice Dirac: shifted kernel, not a snapped one.
  auto off = convolve_initial(k, InitialMeasure::dirac(0.01));
  CHECK(off[mid] == doctest::Approx(gaussian_pdf(0.01, 1.0)).epsilon(1e-12));

  // A gridded N(0, 1) density convolved with p_1 gives the N(0, 2) density.
  std::vector<double> dens(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) dens[j] = gaussian_pdf(grid.x(j), 1.0);
  auto g2 = convolve_initial(k, InitialMeasure::density(grid, dens));
  CHECK(g2[mid + 64] == doctest::Approx(gaussian_pdf(grid.x(mid + 64), 2.0)).epsilon(1e-10));
}

TEST_CASE("initial-data admissibility") {
  const auto lap = half_laplacian();
  const double t[] = {1.0};
  const double x[] = {0.0};
  auto rows = check_initial_admissible(lap, InitialMeasure::dirac(0.0), t, x);
  CHECK(rows[0].status == quad::Status::Finite);
  CHECK(rows[0].value == doctest::Approx(0.398942280401433).epsilon(1e-10));

  const double ts[] = {0.5, 3.0};
  const double xs[] = {-2.0, 7.0};
  rows = check_initial_admissible(lap, InitialMeasure::lebesgue(), ts, xs);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.status == quad::Status::Finite);
    CHECK(r.value == doctest::Approx(1.0));
  }

  const GridSpec grid{8.0, 256, 1};
  std::vector<double> heavy(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) heavy[j] = std::exp(grid.x(j) * grid.x(j));
  const double tt[] = {0.1};
  rows = check_initial_admissible(lap, InitialMeasure::density(grid, heavy), tt, x);
  CHECK(rows[0].boundary_mass);
  CHECK(rows[0].tail_growth);
  CHECK(rows[0].status == quad::Status::Inconclusive);

  std::vector<double> tame(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) tame[j] = gaussian_pdf(grid.x(j), 0.25);
  rows = check_initial_admissible(lap, InitialMeasure::density(grid, tame), t, x);
  CHECK_FALSE(rows[0].boundary_mass);
  CHECK(rows[0].status == quad::Status::Finite);
  CHECK(rows[0].value == doctest::Approx(gaussian_pdf(0.0, 1.25)).epsilon(1e-8));
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(InitialMeasure::atoms({{0.0, 0.0}}), Error);
  CHECK_THROWS_AS(InitialMeasure::atoms({}), Error);
  CHECK_THROWS_AS(InitialMeasure::density(GridSpec{1.0, 8, 1}, std::vector<double>(8, 0.0)), Error);
  CHECK(InitialMeasure::atoms({{0.0, 2.0}, {1.0, 0.5}}).total_mass() == 2.5);
}
