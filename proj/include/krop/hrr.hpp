#pragma once

#include <span>

#include "krop/hypervector.hpp"

namespace krop {

// Binding: t_l = sum_k a_k b_{(l-k) mod N}, computed through the FFT.
HyperVector circular_convolve(const HyperVector& a, const HyperVector& b);

// Unbinding: u_i = sum_j a_j t_{(i+j) mod N}. Adjoint of convolution by a.
HyperVector circular_correlate(const HyperVector& a, const HyperVector& t);

// Element-wise sum of a nonempty list.
HyperVector superpose(std::span<const HyperVector> vs);

// Superposition of bound pairs. Kept as a value so traces can be compared
// against explicit constructions.
class MemoryTrace {
 public:
  explicit MemoryTrace(std::size_t dim) : trace_(HyperVector::zeros(dim)) {}
  explicit MemoryTrace(HyperVector trace) : trace_(std::move(trace)) {}

  std::size_t dim() const noexcept { return trace_.dim(); }
  const HyperVector& vector() const noexcept { return trace_; }

  void bind_add(const HyperVector& key, const HyperVector& value);
  void bind_subtract(const HyperVector& key, const HyperVector& value);
  HyperVector unbind(const HyperVector& key) const { return circular_correlate(key, trace_); }

  void clear() { trace_ = HyperVector::zeros(trace_.dim()); }

 private:
  HyperVector trace_;
};

}  // namespace krop
