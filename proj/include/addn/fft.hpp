#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace addn::fft {

using Complex = std::complex<double>;

/// Unnormalized in-place DFT of any length. The forward transform uses the
/// exp(-2*pi*i*k*n/N) kernel; inverse=true flips the sign and still does not
/// scale. Power-of-two lengths run radix-2, everything else runs Bluestein.
void transform(std::span<Complex> data, bool inverse);

/// Unnormalized 2D DFT over a row-major rows x cols array.
void transform_2d(std::span<Complex> data, std::size_t rows, std::size_t cols, bool inverse);

/// |DFT(x)|^2 for bins 0..n/2 of a real frame of length n.
std::vector<double> power_spectrum(std::span<const double> frame);

}  // namespace addn::fft
