#include "doctest.h"

#include <cmath>
#include <sstream>

#include "shelab/error.hpp"
#include "shelab/simulator.hpp"

using namespace shelab;
using namespace shelab::sim;

namespace {

levy::LevyExponent half_laplacian() { return levy::make_stable_exponent(2.0, 0.0, 0.5, 1); }

SheConfig flat_config(double T, double dt) {
  SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::lebesgue());
  c.grid = GridSpec{4.0, 16, 1};
  c.T = T;
  c.dt = dt;
  return c;
}

SheConfig pam_config(double T, double dt, std::size_t n = 32) {
  SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::lebesgue());
  c.grid = GridSpec{4.0, n, 1};
  c.sigma = Coefficient::affine(0.0, 1.0);
  c.T = T;
  c.dt = dt;
  c.seed = 7;
  return c;
}

double linear_error(double dt) {
  auto c = flat_config(2.0, dt);
  c.b = Coefficient::affine(0.0, 0.5);
  Rng rng(1);
  const auto tr = solve_mild(c, rng);
  double err = 0.0;
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    for (double u : tr.fields[r]) err = std::max(err, std::abs(u - std::exp(0.5 * tr.times[r])));
  }
  return err;
}

}  // namespace

TEST_CASE("coefficients") {
  const auto a = Coefficient::affine(1.0, -2.0);
  CHECK(a(3.0) == -5.0);
  CHECK(a.lipschitz() == 2.0);
  CHECK(Coefficient::zero()(5.0) == 0.0);
  const auto t = Coefficient::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 1.5}, 1.0);
  CHECK(t(0.5) == doctest::Approx(0.5));
  CHECK(t(1.5) == doctest::Approx(1.25));
  CHECK(t(-3.0) == 0.0);
  CHECK(t(9.0) == 1.5);
  CHECK(t.lipschitz() == 1.0);
  CHECK_THROWS_AS(Coefficient::tabulated({0.0, 1.0}, {0.0, 2.0}, 1.0), Error);
  CHECK_THROWS_AS(Coefficient::tabulated({0.0, 0.0}, {0.0, 0.0}, 1.0), Error);
}

TEST_CASE("config validation") {
  auto c = flat_config(1.0, 1e-3);
  CHECK(c.dt_ceiling() == doctest::Approx(0.5 * 0.5 / 2.0));
  CHECK_NOTHROW(c.validate());
  c.dt = 0.2;
  try {
    c.validate();
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("ceiling") != std::string::npos);
  }
  c.dt = 3e-3;  // 1 / 3e-3 is not an integer
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("heat flow from a Dirac mass") {
  SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::dirac(0.0));
  c.grid = GridSpec{8.0, 256, 1};
  c.T = 0.5;
  c.dt = 1e-3;
  Rng rng(3);
  const auto tr = solve_mild(c, rng);
  REQUIRE(tr.times.size() >= 2);
  CHECK(tr.times.back() == 0.5);
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    const double t = tr.times[r];
    if (t < 0.1) continue;
    const auto kern = levy::transition_density(c.phi, t, c.grid);
    const auto ref = levy::convolve_initial(kern, c.mu);
    double err_u = 0.0, err_ref = 0.0;
    for (std::size_t j = 0; j < c.grid.n; ++j) {
      err_u = std::max(err_u, std::abs(tr.fields[r][j] - kern.values[j]));
      err_ref = std::max(err_ref, std::abs(tr.reference[r][j] - ref[j]));
    }
    CHECK(err_u < 1e-6);
    CHECK(err_ref < 1e-8);
  }
}

TEST_CASE("the wrap-around guard rejects small domains") {
  SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::dirac(0.0));
  c.grid = GridSpec{2.0, 64, 1};
  c.T = 1.0;
  c.dt = 1e-3;
  Rng rng(1);
  try {
    solve_mild(c, rng);
    FAIL("expected an extent error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Extent);
  }
}

TEST_CASE("drift-only closed forms") {
  auto c = flat_config(1.0, 1e-3);
  c.b = Coefficient::affine(0.3, 0.0);
  Rng rng(1);
  const auto tr = solve_mild(c, rng);
  double err = 0.0;
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    for (double u : tr.fields[r]) err = std::max(err, std::abs(u - (1.0 + 0.3 * tr.times[r])));
  }
  CHECK(err < 1e-6);

  const double e1 = linear_error(1e-3);
  const double e2 = linear_error(5e-4);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("instability guard") {
  auto c = flat_config(1.0, 1e-3);
  c.b = Coefficient::affine(0.0, 1000.0);
  Rng rng(1);
  try {
    solve_mild(c, rng);
    FAIL("expected an instability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Instability);
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("reproducibility and the noise-off limit") {
  auto c = pam_config(0.5, 5e-3);
  Rng r1(11), r2(11), r3(12);
  const auto a = solve_mild(c, r1);
  const auto b = solve_mild(c, r2);
  const auto d = solve_mild(c, r3);
  CHECK(a.fields == b.fields);
  CHECK(a.fields != d.fields);

  // sigma = eps u: the deviation from the deterministic flow is linear in eps.
  auto dev = [&](double eps) {
    auto e = c;
    e.sigma = Coefficient::affine(0.0, eps);
    Rng rng(5);
    const auto tr = solve_mild(e, rng);
    double m = 0.0;
    for (const auto& f : tr.fields) {
      for (double u : f) m = std::max(m, std::abs(u - 1.0));
    }
    return m;
  };
  const double d1 = dev(1e-3), d2 = dev(1e-4);
  CHECK(d1 > 0.0);
  CHECK(d1 / d2 == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("Picard iteration") {
  SUBCASE("u^0 is the deterministic reference") {
    SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::dirac(0.0));
    c.grid = GridSpec{8.0, 128, 1};
    c.sigma = Coefficient::affine(0.0, 1.0);
    c.T = 0.5;
    c.dt = 2.5e-3;
    const auto res = picard_iterate(c, 1, 1.0, 2, 2);
    for (std::size_t r = 0; r < res.times.size(); ++r) {
      if (res.times[r] < 0.1) continue;
      const auto ref =
          levy::convolve_initial(levy::transition_density(c.phi, res.times[r], c.grid), c.mu);
      double err = 0.0;
      for (std::size_t j = 0; j < c.grid.n; ++j) {
        err = std::max(err, std::abs(res.iterates[0][r][j] - ref[j]));
      }
      CHECK(err < 1e-8);
    }
  }
  SUBCASE("the fixed point is the time-stepped solution") {
    auto c = pam_config(0.05, 5e-3, 16);
    const auto res = picard_iterate(c, 12, 1.0, 2, 3);
    Rng rng(stream_seed(c.seed, 0));
    const auto tr = solve_mild(c, rng);
    double err = 0.0;
    for (std::size_t r = 0; r < tr.times.size(); ++r) {
      for (std::size_t j = 0; j < c.grid.n; ++j) {
        err = std::max(err, std::abs(res.iterates.back()[r][j] - tr.fields[r][j]));
      }
    }
    CHECK(err < 1e-12);
    // After K = 10 steps the iterates stop changing.
    CHECK(res.gaps.back() < 1e-12);
  }
  SUBCASE("deterministic contraction is bounded by L_b / beta") {
    auto c = flat_config(2.0, 1e-2);
    c.b = Coefficient::affine(0.0, 0.5);
    const double beta = 2.0;
    const auto res = picard_iterate(c, 6, beta, 2, 1);
    REQUIRE(res.ratios.size() == 5);
    for (double r : res.ratios) {
      CHECK(r > 0.0);
      CHECK(r <= 0.5 / beta);
    }
  }
}

TEST_CASE("moment curves") {
  SUBCASE("deterministic Dirac data gives a ratio bounded by 1") {
    SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::dirac(0.0));
    c.grid = GridSpec{8.0, 128, 1};
    c.T = 1.0;
    c.dt = 5e-3;
    const auto curve = estimate_moments(c, 3, 4);
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
      INFO("excess ", curve.values[i] - 1.0, " at x=", curve.argmax_x[i]);
      CHECK(curve.values[i] <= 1.0 + 1e-9);
      CHECK(curve.values[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(curve.stderr_[i] < 1e-12);
    }
    const auto g = estimate_gamma_bar(curve);
    CHECK(g.slope <= 0.0 + g.ci + 1e-9);
  }
  SUBCASE("PAM second moment is at least 1 and grows") {
    auto c = pam_config(2.0, 5e-3);
    const auto curve = estimate_moments(c, 2, 400);
    REQUIRE(curve.times.size() >= 10);
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
      CHECK(curve.values[i] >= 1.0 - 3.0 * curve.stderr_[i]);
    }
    for (std::size_t i = 1; i < curve.times.size(); ++i) {
      CHECK(curve.values[i] >= curve.values[i - 1] -
                                   3.0 * std::hypot(curve.stderr_[i], curve.stderr_[i - 1]));
    }
    CHECK(curve.values.back() > 1.0);
  }
  SUBCASE("small and large ensembles agree") {
    auto c = pam_config(0.5, 5e-3, 16);
    c.record_stride = 100;
    const auto small = estimate_moments(c, 2, 2);
    const auto large = estimate_moments(c, 2, 10000);
    const double se = std::hypot(small.stderr_.back(), large.stderr_.back());
    CHECK(std::abs(small.values.back() - large.values.back()) <= 3.0 * se);
  }
  SUBCASE("thread count does not change the result") {
    auto c = pam_config(0.5, 5e-3, 16);
    c.threads = 1;
    const auto a = estimate_moments(c, 2, 40);
    c.threads = 3;
    const auto b = estimate_moments(c, 2, 40);
    CHECK(a.values == b.values);
    CHECK(a.stderr_ == b.stderr_);
  }
}

TEST_CASE("weighted norm") {
  MomentCurve c;
  for (int i = 1; i <= 20; ++i) c.times.push_back(0.5 * i);
  for (double t : c.times) c.values.push_back(2.0);
  CHECK(weighted_norm(c, 0.3) == doctest::Approx(2.0 * std::exp(-0.3 * 0.5)));
  for (std::size_t i = 0; i < c.times.size(); ++i) c.values[i] = std::exp(0.4 * c.times[i]);
  CHECK(weighted_norm(c, 1.0) == doctest::Approx(std::exp(-0.6 * 0.5)));
  CHECK(weighted_norm(c, 0.1) == doctest::Approx(std::exp(0.3 * 10.0)));
  CHECK_THROWS_AS(weighted_norm(MomentCurve{}, 1.0), Error);
}

TEST_CASE("gamma estimate") {
  MomentCurve c;
  c.p = 2;
  for (int i = 1; i <= 40; ++i) {
    c.times.push_back(0.25 * i);
    c.values.push_back(std::exp(0.3 * c.times.back()));
    c.stderr_.push_back(0.0);
  }
  const auto g = estimate_gamma_bar(c);
  CHECK(std::abs(g.slope - 0.3) < 1e-12);
  CHECK(g.ci == 0.0);
  CHECK(g.points == 21);
  CHECK_FALSE(g.path_bootstrap);
  CHECK_THROWS_AS(estimate_gamma_bar(c, 9.5, 10.0), Error);
  c.values[35] = 0.0;
  CHECK_THROWS_AS(estimate_gamma_bar(c), Error);
}

TEST_CASE("moment bound verdicts") {
  SUBCASE("drift-only sharp case") {
    auto c = flat_config(10.0, 1e-3);
    c.b = Coefficient::affine(0.0, 0.5);
    const auto v = verify_moment_bound(c, 2, 2, 1e-2);
    CHECK(v.beta_star == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(v.gamma_hat == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(v.holds);
  }
  SUBCASE("no drift, no noise") {
    SheConfig c(half_laplacian(), spectral::Covariance::white(1), levy::InitialMeasure::dirac(0.0));
    c.grid = GridSpec{16.0, 256, 1};
    c.T = 4.0;
    c.dt = 5e-3;
    const auto v = verify_moment_bound(c, 2, 2, 1e-2);
    CHECK(v.gamma_hat <= 1e-9);
    CHECK(v.beta_star == 0.0);
    CHECK(v.holds);
  }
}

TEST_CASE("exports") {
  auto c = flat_config(0.01, 5e-3);
  Rng rng(1);
  const auto tr = solve_mild(c, rng);
  std::ostringstream a;
  write_trajectory_csv(a, tr);
  const std::string text = a.str();
  CHECK(text.rfind("t,x,u,reference\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 16);

  MomentCurve m;
  m.times = {1.0};
  m.values = {2.0};
  m.stderr_ = {0.5};
  m.M = 10;
  std::ostringstream b;
  write_moment_csv(b, m);
  CHECK(b.str() == "t,value,stderr,M,p\n1,2,0.5,10,2\n");
}
