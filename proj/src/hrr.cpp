#include "krop/hrr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "krop/fft.hpp"

namespace krop {

void require_valid_dim(std::size_t n, const char* what) {
  if (n < 2 || !is_power_of_two(n)) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(n) +
                         " is not a power of two >= 2");
  }
}

void require_same_dim(const HyperVector& a, const HyperVector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

HyperVector::HyperVector(std::vector<double> entries) : entries_(std::move(entries)) {
  require_valid_dim(entries_.size(), "HyperVector");
  for (double v : entries_) {
    if (!std::isfinite(v)) throw ValidationError("HyperVector: non-finite entry");
  }
}

HyperVector::HyperVector(std::initializer_list<double> entries)
    : HyperVector(std::vector<double>(entries)) {}

HyperVector HyperVector::zeros(std::size_t dim) {
  require_valid_dim(dim, "HyperVector::zeros");
  return HyperVector(Unchecked{}, std::vector<double>(dim, 0.0));
}

HyperVector HyperVector::basis(std::size_t dim, std::size_t index) {
  require_valid_dim(dim, "HyperVector::basis");
  if (index >= dim) throw std::out_of_range("HyperVector::basis: index out of range");
  std::vector<double> e(dim, 0.0);
  e[index] = 1.0;
  return HyperVector(Unchecked{}, std::move(e));
}

double HyperVector::dot(const HyperVector& other) const {
  require_same_dim(*this, other, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) acc += entries_[i] * other.entries_[i];
  return acc;
}

double HyperVector::norm() const { return std::sqrt(dot(*this)); }

HyperVector HyperVector::operator-() const {
  std::vector<double> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(), [](double v) { return -v; });
  return HyperVector(Unchecked{}, std::move(out));
}

HyperVector& HyperVector::operator+=(const HyperVector& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

HyperVector& HyperVector::operator-=(const HyperVector& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

HyperVector& HyperVector::operator*=(double scale) {
  for (double& v : entries_) v *= scale;
  return *this;
}

namespace {

std::vector<Complex> to_spectrum(const HyperVector& v) {
  std::vector<Complex> x(v.values().begin(), v.values().end());
  fft_inplace(x, false);
  return x;
}

HyperVector real_part(std::vector<Complex>& spectrum) {
  fft_inplace(spectrum, true);
  std::vector<double> out(spectrum.size());
#ifndef NDEBUG
  double norm2 = 0.0;
  double worst_imag = 0.0;
  for (const auto& c : spectrum) {
    norm2 += std::norm(c);
    worst_imag = std::max(worst_imag, std::abs(c.imag()));
  }
  assert(worst_imag <= 1e-6 * std::sqrt(norm2) + 1e-300);
#endif
  for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i].real();
  return HyperVector(std::move(out));
}

}  // namespace

HyperVector circular_convolve(const HyperVector& a, const HyperVector& b) {
  require_same_dim(a, b, "circular_convolve");
  auto fa = to_spectrum(a);
  const auto fb = to_spectrum(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return real_part(fa);
}

HyperVector circular_correlate(const HyperVector& a, const HyperVector& t) {
  require_same_dim(a, t, "circular_correlate");
  auto fa = to_spectrum(a);
  const auto ft = to_spectrum(t);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = std::conj(fa[i]) * ft[i];
  return real_part(fa);
}

HyperVector superpose(std::span<const HyperVector> vs) {
  if (vs.empty()) throw std::invalid_argument("superpose: empty list");
  HyperVector sum = vs.front();
  for (std::size_t i = 1; i < vs.size(); ++i) {
    require_same_dim(sum, vs[i], "superpose");
    sum += vs[i];
  }
  return sum;
}

void MemoryTrace::bind_add(const HyperVector& key, const HyperVector& value) {
  trace_ += circular_convolve(key, value);
}

void MemoryTrace::bind_subtract(const HyperVector& key, const HyperVector& value) {
  trace_ -= circular_convolve(key, value);
}

}  // namespace krop
