#ifndef FRACMILD_FFT_HPP
#define FRACMILD_FFT_HPP

#include <complex>
#include <vector>

namespace fracmild {

/// In-place forward DFT, X_k = sum_j x_j e^{-2pi i jk/N}. Radix-2 when N is a
/// power of two, O(N^2) direct transform otherwise (grids here stay small).
void fft(std::vector<std::complex<double>>& a);

/// Inverse DFT including the 1/N factor.
void ifft(std::vector<std::complex<double>>& a);

/// Signed wavenumber index of FFT bin m: m for m <= N/2, m-N above.
inline int fft_wavenumber(int m, int n) { return (m <= n / 2) ? m : m - n; }

} // namespace fracmild

#endif
