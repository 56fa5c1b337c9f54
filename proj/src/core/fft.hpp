#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gaitscreen::fft {

using cplx = std::complex<double>;

// In-place radix-2 transform. Size must be a power of two. The inverse is
// scaled by 1/n.
void transform_pow2(std::vector<cplx>& data, bool inverse);

std::size_t next_pow2(std::size_t n);

// Chirp z-transform by Bluestein's convolution:
//   X_k = sum_n x_n * a^{-n} * w^{n k},  k = 0..m-1
// where a = a0 e^{j theta0} and w = w0 e^{-j phi0}. The contour points are
// z_k = a * w^{-k}. Cost is O((n + m) log(n + m)).
struct Contour {
  double a0 = 1.0;
  double theta0 = 0.0;
  double w0 = 1.0;
  double phi0 = 0.0;
};
std::vector<cplx> chirp_z(std::span<const cplx> x, const Contour& contour, std::size_t m);

// Arbitrary-length DFT (Bluestein when n is not a power of two). Inverse is
// scaled by 1/n.
std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false);

}  // namespace gaitscreen::fft
