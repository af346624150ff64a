#include "fracmild/fft.hpp"

#include <cmath>
#include <numbers>

namespace fracmild {

namespace {

bool is_pow2(size_t n) { return n && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void dft_direct(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  std::vector<std::complex<double>> out(n);
  const double sgn = inverse ? 1.0 : -1.0;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> s(0.0, 0.0);
    for (size_t j = 0; j < n; ++j) {
      const double ang = sgn * 2.0 * std::numbers::pi * static_cast<double>(j * k % n) /
                         static_cast<double>(n);
      s += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  a = std::move(out);
}

} // namespace

void fft(std::vector<std::complex<double>>& a) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size()))
    fft_radix2(a, false);
  else
    dft_direct(a, false);
}

void ifft(std::vector<std::complex<double>>& a) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size()))
    fft_radix2(a, true);
  else
    dft_direct(a, true);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= inv;
}

} // namespace fracmild
