#include "core/fft.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace gaitscreen::fft {
namespace {

const std::vector<cplx>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> table(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    table[j] = {std::cos(angle), std::sin(angle)};
  }
  return cache.emplace(n, std::move(table)).first->second;
}

// w^t for real t, w = w0 e^{-j phi}, with the phase reduced in extended
// precision so large t (t ~ n^2/2) keeps full accuracy.
cplx chirp_power(double w0, double phi, long double t) {
  constexpr long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double angle = std::fmod(static_cast<long double>(phi) * t, two_pi);
  double mag = (w0 == 1.0) ? 1.0 : std::exp(static_cast<double>(t) * std::log(w0));
  return std::polar(mag, -static_cast<double>(angle));
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void transform_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cplx w = tw[j * stride];
        if (inverse) w = std::conj(w);
        cplx u = a[i + j];
        cplx v = a[i + j + half] * w;
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
  }
}

std::vector<cplx> chirp_z(std::span<const cplx> x, const Contour& c, std::size_t m) {
  const std::size_t n = x.size();
  if (n == 0 || m == 0) return std::vector<cplx>(m);
  const std::size_t len = next_pow2(n + m - 1);

  std::vector<cplx> y(len);
  for (std::size_t i = 0; i < n; ++i) {
    long double ii = static_cast<long double>(i);
    // a^{-n} = a0^{-n} e^{-j theta0 n}
    cplx a_pow = chirp_power(1.0 / c.a0, c.theta0, ii);
    y[i] = x[i] * a_pow * chirp_power(c.w0, c.phi0, ii * ii / 2.0L);
  }

  std::vector<cplx> v(len);
  for (std::size_t k = 0; k < m; ++k) {
    long double kk = static_cast<long double>(k);
    v[k] = chirp_power(c.w0, c.phi0, -kk * kk / 2.0L);
  }
  for (std::size_t i = 1; i < n; ++i) {
    long double ii = static_cast<long double>(i);
    v[len - i] = chirp_power(c.w0, c.phi0, -ii * ii / 2.0L);
  }

  transform_pow2(y, false);
  transform_pow2(v, false);
  for (std::size_t i = 0; i < len; ++i) y[i] *= v[i];
  transform_pow2(y, true);

  std::vector<cplx> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    long double kk = static_cast<long double>(k);
    out[k] = y[k] * chirp_power(c.w0, c.phi0, kk * kk / 2.0L);
  }
  return out;
}

std::vector<cplx> dft(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<cplx> a(x.begin(), x.end());
    transform_pow2(a, inverse);
    return a;
  }
  Contour c;
  c.phi0 = (inverse ? -2.0 : 2.0) * std::numbers::pi / static_cast<double>(n);
  auto out = chirp_z(x, c, n);
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
  }
  return out;
}

}  // namespace gaitscreen::fft
