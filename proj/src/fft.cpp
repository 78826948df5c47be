#include "krop/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "krop/hypervector.hpp"

namespace krop {
namespace {

struct FftPlan {
  std::vector<std::size_t> bit_reverse;
  // twiddle[j] = exp(-2*pi*i*j/N), j < N/2
  std::vector<Complex> twiddle;
};

std::shared_ptr<const FftPlan> make_plan(std::size_t n) {
  auto plan = std::make_shared<FftPlan>();
  const unsigned bits = log2_exact(n);
  plan->bit_reverse.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (unsigned b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    plan->bit_reverse[i] = r;
  }
  plan->twiddle.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    plan->twiddle[j] = Complex(std::cos(angle), std::sin(angle));
  }
  return plan;
}

std::shared_ptr<const FftPlan> plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = make_plan(n);
  return slot;
}

}  // namespace

void fft_inplace(std::span<Complex> x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) {
    throw DimensionError("fft: length " + std::to_string(n) + " is not a power of two");
  }
  if (n == 1) return;
  const auto plan = plan_for(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = plan->bit_reverse[i];
    if (i < r) std::swap(x[i], x[r]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = plan->twiddle[j * stride];
        if (inverse) w = std::conj(w);
        const Complex even = x[start + j];
        const Complex odd = w * x[start + j + half];
        x[start + j] = even + odd;
        x[start + j + half] = even - odd;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= scale;
  }
}

std::vector<Complex> fft(std::span<const Complex> x, bool inverse) {
  std::vector<Complex> out(x.begin(), x.end());
  fft_inplace(out, inverse);
  return out;
}

}  // namespace krop
