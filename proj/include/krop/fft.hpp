#pragma once

#include <complex>
#include <span>
#include <vector>

namespace krop {

using Complex = std::complex<double>;

// Iterative radix-2 decimation-in-time transform over a power-of-two length.
// The inverse direction applies the 1/N scale. Bit-reversal and twiddle tables
// are built once per length and shared between threads.
void fft_inplace(std::span<Complex> x, bool inverse);

std::vector<Complex> fft(std::span<const Complex> x, bool inverse = false);

}  // namespace krop
