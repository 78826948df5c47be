#include <cmath>
#include <vector>

#include "doctest.h"
#include "krop/codebook.hpp"
#include "krop/fft.hpp"
#include "krop/hrr.hpp"
#include "krop/rng.hpp"
#include "oracles.hpp"

using namespace krop;

namespace {

std::vector<double> random_entries(std::size_t n, SeededRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("fft of delta and constant") {
  const auto delta = fft(std::vector<Complex>{1, 0, 0, 0});
  for (const auto& c : delta) CHECK(std::abs(c - Complex(1, 0)) < 1e-15);

  const auto flat = fft(std::vector<Complex>{1, 1, 1, 1});
  CHECK(std::abs(flat[0] - Complex(4, 0)) < 1e-15);
  for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(flat[i]) < 1e-15);
}

TEST_CASE("fft matches the naive DFT at N=16") {
  SeededRng rng(11);
  std::vector<Complex> x(16);
  for (auto& c : x) c = Complex(rng.normal(), rng.normal());
  for (bool inverse : {false, true}) {
    const auto fast = fft(x, inverse);
    const auto slow = oracle::naive_dft(x, inverse);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
  }
}

TEST_CASE("fft round trip up to 2^20") {
  SeededRng rng(3);
  for (unsigned k : {1u, 5u, 12u, 20u}) {
    const std::size_t n = std::size_t{1} << k;
    std::vector<Complex> x(n);
    double norm = 0.0;
    for (auto& c : x) {
      c = Complex(rng.normal(), rng.normal());
      norm = std::max(norm, std::abs(c));
    }
    const auto back = fft(fft(x), true);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - x[i]));
    CHECK(err <= 1e-9 * norm);
  }
}

TEST_CASE("fft rejects non power of two") {
  CHECK_THROWS_AS(fft(std::vector<Complex>(6)), DimensionError);
}

TEST_CASE("hypervector invariants") {
  CHECK_THROWS_AS(HyperVector({1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(HyperVector({1.0}), DimensionError);
  CHECK_THROWS_AS(HyperVector({1.0, NAN}), ValidationError);
  CHECK_THROWS_AS(HyperVector({1.0, INFINITY}), ValidationError);
  CHECK_NOTHROW(HyperVector({0.0, 0.0}));
}

TEST_CASE("convolution examples") {
  const HyperVector b{3, 1, 4, 1};
  CHECK(max_abs_diff(circular_convolve(HyperVector{1, 0, 0, 0}, b).values(), b.values()) < 1e-12);
  const HyperVector rotated{1, 3, 1, 4};
  CHECK(max_abs_diff(circular_convolve(HyperVector{0, 1, 0, 0}, b).values(), rotated.values()) <
        1e-12);
}

TEST_CASE("correlation with a delta is the identity") {
  const HyperVector t{3, 1, 4, 1};
  CHECK(max_abs_diff(circular_correlate(HyperVector{1, 0, 0, 0}, t).values(), t.values()) < 1e-12);
}

TEST_CASE("convolution and correlation match double loops, N = 2..4096") {
  SeededRng rng(20);
  for (unsigned k = 1; k <= 12; ++k) {
    const std::size_t n = std::size_t{1} << k;
    const unsigned cases = k <= 10 ? 5 : 2;
    for (unsigned c = 0; c < cases; ++c) {
      const auto a = random_entries(n, rng);
      const auto b = random_entries(n, rng);
      const auto want_conv = oracle::convolve(a, b);
      const auto got_conv = circular_convolve(HyperVector(a), HyperVector(b));
      CHECK(max_abs_diff(got_conv.values(), want_conv) <= 1e-9 * std::max(1.0, max_abs(want_conv)));

      const auto want_corr = oracle::correlate(a, want_conv);
      const auto got_corr = circular_correlate(HyperVector(a), got_conv);
      CHECK(max_abs_diff(got_corr.values(), want_corr) <= 1e-9 * std::max(1.0, max_abs(want_corr)));
    }
  }
}

TEST_CASE("random N=8 binding matches brute force to 1e-9") {
  SeededRng rng(8);
  const auto a = random_entries(8, rng);
  const auto v = random_entries(8, rng);
  const auto t = circular_convolve(HyperVector(a), HyperVector(v));
  CHECK(max_abs_diff(t.values(), oracle::convolve(a, v)) < 1e-9);
  const auto u = circular_correlate(HyperVector(a), t);
  CHECK(max_abs_diff(u.values(), oracle::correlate(a, oracle::convolve(a, v))) < 1e-9);
}

TEST_CASE("convolution commutes and correlation is its adjoint") {
  SeededRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = std::size_t{1} << (1 + rng.below(10));
    const HyperVector a(random_entries(n, rng));
    const HyperVector v(random_entries(n, rng));
    const HyperVector t(random_entries(n, rng));
    const auto ab = circular_convolve(a, v);
    const auto ba = circular_convolve(v, a);
    CHECK(max_abs_diff(ab.values(), ba.values()) < 1e-9 * std::max(1.0, ab.norm()));
    const double lhs = circular_convolve(a, v).dot(t);
    const double rhs = v.dot(circular_correlate(a, t));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * a.norm() * v.norm() * t.norm());
  }
}

TEST_CASE("operations leave inputs unmodified") {
  const HyperVector a{0.5, -1, 2, 0.25};
  const HyperVector b{3, 1, 4, 1};
  const HyperVector a0 = a;
  const HyperVector b0 = b;
  (void)circular_convolve(a, b);
  (void)circular_correlate(a, b);
  const std::vector<HyperVector> list{a, b};
  (void)superpose(list);
  CHECK(a == a0);
  CHECK(b == b0);
}

TEST_CASE("dimension mismatch is rejected") {
  const HyperVector a{1, 0};
  const HyperVector b{1, 0, 0, 0};
  CHECK_THROWS_AS(circular_convolve(a, b), DimensionError);
  CHECK_THROWS_AS(circular_correlate(a, b), DimensionError);
  const std::vector<HyperVector> list{a, b};
  CHECK_THROWS_AS(superpose(list), DimensionError);
}

TEST_CASE("superpose") {
  const std::vector<HyperVector> pair{HyperVector{1, 2}, HyperVector{3, 4}};
  CHECK(superpose(pair) == HyperVector{4, 6});

  const HyperVector v{0.5, -2, 7, 1};
  const std::vector<HyperVector> single{v};
  CHECK(superpose(single) == v);

  const std::vector<HyperVector> cancel{v, -v};
  CHECK(superpose(cancel) == HyperVector::zeros(4));

  CHECK_THROWS_AS(superpose(std::vector<HyperVector>{}), std::invalid_argument);
}

TEST_CASE("unbinding recovers the value in expectation") {
  // a ~ N(0, 1/N), N = 1024: E[<a # (a * v), v>] = 1 for unit v.
  SeededRng rng(1024);
  constexpr std::size_t n = 1024;
  double total = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const HyperVector a = sample_normal_vector(n, rng);
    HyperVector v = sample_normal_vector(n, rng);
    v *= 1.0 / v.norm();
    const auto u = circular_correlate(a, circular_convolve(a, v));
    total += u.dot(v);
  }
  CHECK(std::abs(total / 100.0 - 1.0) <= 0.15);
}

TEST_CASE("memory trace bind and unbind") {
  MemoryTrace trace(4);
  const HyperVector key{1, 0, 0, 0};
  const HyperVector value{3, 1, 4, 1};
  trace.bind_add(key, value);
  CHECK(max_abs_diff(trace.unbind(key).values(), value.values()) < 1e-12);
  trace.bind_subtract(key, value);
  CHECK(trace.vector().norm() < 1e-12);
}
