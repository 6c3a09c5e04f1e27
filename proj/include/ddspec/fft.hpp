#pragma once

// Thin RAII layer over FFTW. Planning is serialized internally so plans can
// be created from inside OpenMP regions; execution is reentrant.

#include <complex>
#include <cstddef>
#include <vector>

namespace ddspec::fft {

using cplx = std::complex<double>;

// n real samples -> n/2+1 complex bins, unnormalized: X_k = sum x_j e^{-2 pi i jk/n}
void forward_real(const std::vector<double>& in, std::vector<cplx>& out);

// complex <-> complex, unnormalized; sign = -1 forward, +1 backward
void transform(const std::vector<cplx>& in, std::vector<cplx>& out, int sign);

std::size_t next_pow2(std::size_t n);

} // namespace ddspec::fft
