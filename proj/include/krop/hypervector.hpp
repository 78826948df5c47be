#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace krop {

// Raised when operands disagree on dimension or a length is not a power of two.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a value violates a domain invariant (angle range, K bounds, NaN input).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// log2 of a power of two.
constexpr unsigned log2_exact(std::size_t n) noexcept {
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

// Dense real vector of dimension N = 2^K, N >= 2, with finite entries.
class HyperVector {
 public:
  explicit HyperVector(std::vector<double> entries);
  HyperVector(std::initializer_list<double> entries);

  static HyperVector zeros(std::size_t dim);
  // Unit vector e_index.
  static HyperVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return entries_.size(); }
  std::span<const double> values() const noexcept { return entries_; }
  const std::vector<double>& vec() const noexcept { return entries_; }
  const double* data() const noexcept { return entries_.data(); }

  double operator[](std::size_t i) const { return entries_[i]; }

  double dot(const HyperVector& other) const;
  double norm() const;

  HyperVector operator-() const;
  HyperVector& operator+=(const HyperVector& other);
  HyperVector& operator-=(const HyperVector& other);
  HyperVector& operator*=(double scale);

  friend HyperVector operator+(HyperVector lhs, const HyperVector& rhs) { return lhs += rhs; }
  friend HyperVector operator-(HyperVector lhs, const HyperVector& rhs) { return lhs -= rhs; }
  friend HyperVector operator*(HyperVector lhs, double scale) { return lhs *= scale; }

  bool operator==(const HyperVector&) const = default;

 private:
  struct Unchecked {};
  HyperVector(Unchecked, std::vector<double> entries) : entries_(std::move(entries)) {}

  std::vector<double> entries_;
};

// Throws DimensionError unless n is a power of two and at least 2.
void require_valid_dim(std::size_t n, const char* what);
void require_same_dim(const HyperVector& a, const HyperVector& b, const char* what);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace krop
