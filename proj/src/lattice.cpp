#include "shelab/lattice.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "shelab/error.hpp"
#include "shelab/fft.hpp"
#include "shelab/quadrature.hpp"

namespace shelab::lattice {

std::vector<double> correlate(std::span<const double> a, std::span<const double> b, double h) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::InvalidArgument,
          "correlation needs two equal, nonempty sequences");
  const std::size_t n = a.size();
  std::size_t m = 1;
  while (m < 2 * n) m *= 2;
  std::vector<fft::cplx> fa(m), fb(m);
  for (std::size_t j = 0; j < n; ++j) {
    fa[j] = a[j];
    fb[j] = b[j];
  }
  fft::forward(fa, m, 1);
  fft::forward(fb, m, 1);
  for (std::size_t k = 0; k < m; ++k) fa[k] *= std::conj(fb[k]);
  fft::backward(fa, m, 1);
  std::vector<double> out(2 * n - 1);
  const double scale = h / static_cast<double>(m);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Lag L = i - (n - 1); negative lags sit at the top of the padded buffer.
    const long lag = static_cast<long>(i) - static_cast<long>(n - 1);
    const std::size_t pos = lag >= 0 ? static_cast<std::size_t>(lag)
                                     : m - static_cast<std::size_t>(-lag);
    out[i] = fa[pos].real() * scale;
  }
  return out;
}

double integrate_even_weight(const std::function<double(double)>& f,
                             std::span<const double> lags, double h) {
  require(lags.size() % 2 == 1 && lags.size() >= 9, ErrorCode::InvalidArgument,
          "lag sequence must be odd-length and hold at least 9 points");
  const long n = static_cast<long>(lags.size() / 2);  // largest lag index
  // Symmetrized correlation C(r) = c(r) + c(-r) at r = m h, m = 0..n.
  std::vector<double> sym(static_cast<std::size_t>(n + 1));
  for (long m = 0; m <= n; ++m) {
    sym[static_cast<std::size_t>(m)] = lags[static_cast<std::size_t>(n + m)] +
                                       (m == 0 ? 0.0 : lags[static_cast<std::size_t>(n - m)]);
  }
  sym[0] = 2.0 * lags[static_cast<std::size_t>(n)];
  // C is even in r, so stencils may reach across the origin.
  auto value = [&](long m) -> double {
    const long am = std::abs(m);
    return am <= n ? sym[static_cast<std::size_t>(am)] : 0.0;
  };
  const double peak = *std::max_element(sym.begin(), sym.end(),
                                        [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double cutoff = 1e-18 * std::abs(peak);

  constexpr int kLeft = 3, kRight = 4;  // degree-7 stencil around each cell
  auto interpolant = [&](long cell) {
    return [&, cell](double r) {
      const double u = r / h - static_cast<double>(cell);
      double acc = 0.0;
      for (int i = -kLeft; i <= kRight; ++i) {
        double w = 1.0;
        for (int k = -kLeft; k <= kRight; ++k) {
          if (k != i) w *= (u - k) / static_cast<double>(i - k);
        }
        acc += w * value(cell + i);
      }
      return acc;
    };
  };

  double total = 0.0;
  for (long cell = 0; cell < n; ++cell) {
    double local = 0.0;
    for (int i = -kLeft; i <= kRight; ++i) local = std::max(local, std::abs(value(cell + i)));
    if (local <= cutoff) continue;
    const double a = static_cast<double>(cell) * h;
    const double b = a + h;
    auto c = interpolant(cell);
    auto integrand = [&](double r) { return f(r) * c(r); };
    if (cell == 0) {
      total += quad::finite(integrand, a, b, quad::Options{1e-13});
    } else {
      total += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, b);
    }
  }
  // The symmetrized C counts both signs of r already.
  return total;
}

}  // namespace shelab::lattice
