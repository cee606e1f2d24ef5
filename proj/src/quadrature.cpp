#include "shelab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shelab/error.hpp"

namespace shelab::quad {

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Finite: return "finite";
    case Status::Divergent: return "divergent";
    case Status::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

double finite(const Integrand& f, double a, double b, const Options& opt) {
  if (a == b) return 0.0;
  try {
    boost::math::quadrature::tanh_sinh<double> integrator(15);
    auto guarded = [&](double x) {
      const double v = f(x);
      return std::isfinite(v) ? v : 0.0;
    };
    return integrator.integrate(guarded, a, b, opt.rel_tol);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Nonconvergence,
                std::string("tanh-sinh quadrature failed: ") + e.what());
  }
}

namespace {

double gk_adapt(const Integrand& f, double a, double b, int depth, double rel_tol,
                double abs_tol) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 0, rel_tol, &err);
  if (depth <= 0 || err <= std::max(rel_tol * std::abs(v), abs_tol)) return v;
  const double mid = 0.5 * (a + b);
  return gk_adapt(f, a, mid, depth - 1, rel_tol, 0.5 * abs_tol) +
         gk_adapt(f, mid, b, depth - 1, rel_tol, 0.5 * abs_tol);
}

}  // namespace

double smooth(const Integrand& f, double a, double b, const Options& opt, double abs_tol) {
  if (a == b) return 0.0;
  try {
    return gk_adapt(f, a, b, opt.max_depth, opt.rel_tol, abs_tol);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Nonconvergence,
                std::string("Gauss-Kronrod quadrature failed: ") + e.what());
  }
}

namespace {

bool stable_last(const std::vector<double>& ks, std::size_t count, double spread) {
  if (ks.size() < count) return false;
  double lo = ks.back(), hi = ks.back();
  for (std::size_t i = ks.size() - count; i < ks.size(); ++i) {
    if (!std::isfinite(ks[i])) return false;
    lo = std::min(lo, ks[i]);
    hi = std::max(hi, ks[i]);
  }
  return hi - lo <= spread;
}

double substituted_tail(const Integrand& g, double radius, const Options& opt) {
  auto h = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double r = radius / u;
    if (!std::isfinite(r)) return 0.0;
    const double v = g(r) * radius / (u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  return finite(h, 0.0, 1.0, opt);
}

}  // namespace

HalfLine half_line(const Integrand& g, const Options& opt, double limit) {
  require(limit > 0.0, ErrorCode::InvalidArgument, "half-line limit must be positive");
  HalfLine out;
  double radius = std::min(opt.first_segment, limit);
  double total = finite(g, 0.0, radius, opt);

  std::vector<double> ks;
  double prev_inc = std::numeric_limits<double>::quiet_NaN();
  int negligible_run = 0;

  auto negligible = [&](double inc) {
    return std::abs(inc) <= 1e-2 * opt.rel_tol * std::abs(total) ||
           (inc == 0.0 && total == 0.0);
  };

  while (true) {
    if (radius >= limit) break;
    if (radius >= opt.max_radius) {
      out.value = total;
      out.status = Status::Inconclusive;
      out.radius = radius;
      out.tail_power = ks.empty() ? out.tail_power : ks.back();
      return out;
    }
    const double next = std::min(2.0 * radius, limit);
    const bool full = next == 2.0 * radius;
    const double inc = smooth(g, radius, next, opt, 1e-3 * opt.rel_tol * std::abs(total));
    total += inc;

    negligible_run = negligible(inc) ? negligible_run + 1 : 0;
    if (negligible_run >= 2) {
      out.value = total;
      out.status = Status::Finite;
      out.radius = next;
      return out;
    }
    if (full && std::isfinite(prev_inc) && prev_inc != 0.0 && inc != 0.0) {
      ks.push_back(1.0 - std::log2(std::abs(inc / prev_inc)));
    }
    prev_inc = full ? inc : std::numeric_limits<double>::quiet_NaN();
    radius = next;

    if (radius >= limit) break;
    if (radius >= 8.0 * opt.first_segment && stable_last(ks, 3, 0.02) &&
        ks.back() > 1.1) {
      out.value = total + substituted_tail(g, radius, opt);
      out.status = Status::Finite;
      out.tail_power = ks.back();
      out.radius = radius;
      return out;
    }
    if (radius >= opt.divergence_radius && stable_last(ks, 3, 0.05) &&
        ks.back() < 0.9) {
      out.value = total;
      out.status = Status::Divergent;
      out.tail_power = ks.back();
      out.radius = radius;
      return out;
    }
  }

  // The range ended at a finite limit; nothing beyond it may be evaluated.
  out.radius = radius;
  out.value = total;
  if (negligible_run >= 1) {
    out.status = Status::Finite;
    return out;
  }
  if (!ks.empty()) {
    out.tail_power = ks.back();
    if (ks.back() > 1.1) {
      // g ~ c r^-k beyond the edge integrates to g(limit) * limit / (k - 1).
      out.value = total + g(limit) * limit / (ks.back() - 1.0);
      out.status = Status::Finite;
    } else if (ks.back() < 0.9) {
      out.status = Status::Divergent;
    } else {
      out.status = Status::Inconclusive;
    }
    return out;
  }
  const double edge = std::abs(g(limit)) * limit;
  out.status = edge <= opt.rel_tol * std::abs(total) ? Status::Finite
                                                     : Status::Inconclusive;
  return out;
}

}  // namespace shelab::quad
