#include "shelab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "shelab/error.hpp"

namespace shelab::fft {
namespace {

// The FFTW planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans live for the lifetime of the process.
std::mutex g_planner_mutex;
std::map<std::tuple<std::size_t, int, int>, fftw_plan> g_plans;

fftw_plan plan_for(std::size_t n, int dim, int sign) {
  std::lock_guard lock(g_planner_mutex);
  const auto key = std::make_tuple(n, dim, sign);
  if (auto it = g_plans.find(key); it != g_plans.end()) return it->second;
  std::vector<int> dims(static_cast<std::size_t>(dim), static_cast<int>(n));
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= n;
  auto* scratch = fftw_alloc_complex(total);
  // ESTIMATE keeps the chosen algorithm independent of timing noise, which
  // keeps repeated runs bit-identical.
  fftw_plan plan = fftw_plan_dft(dim, dims.data(), scratch, scratch, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  require(plan != nullptr, ErrorCode::Internal, "FFTW planning failed");
  g_plans.emplace(key, plan);
  return plan;
}

void execute(std::span<cplx> data, std::size_t n, int dim, int sign) {
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= n;
  require(data.size() == total, ErrorCode::InvalidArgument,
          "FFT buffer size does not match n^dim");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(n, dim, sign), ptr, ptr);
}

}  // namespace

void forward(std::span<cplx> data, std::size_t n, int dim) {
  execute(data, n, dim, FFTW_FORWARD);
}

void backward(std::span<cplx> data, std::size_t n, int dim) {
  execute(data, n, dim, FFTW_BACKWARD);
}

}  // namespace shelab::fft
