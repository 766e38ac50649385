#pragma once

#include <complex>
#include <span>

namespace hswift::fft {

enum class Sign { negative = -1, positive = +1 };

/// out[k] = sum_n in[n] * exp(sign * 2 pi i n k / N), N = in.size(), unnormalized.
/// Plans are cached per (size, sign); safe to call concurrently.
void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, Sign sign);

}  // namespace hswift::fft
