#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace shelab::fft {

using cplx = std::complex<double>;

/// Unnormalized in-place transforms on a d-dimensional cube of side n
/// (row-major). Forward uses exp(-2 pi i jk/n), backward exp(+2 pi i jk/n).
void forward(std::span<cplx> data, std::size_t n, int dim = 1);
void backward(std::span<cplx> data, std::size_t n, int dim = 1);

}  // namespace shelab::fft
