#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "krop/cleanup.hpp"
#include "oracles.hpp"

using namespace krop;
using std::numbers::pi;

namespace {

HyperVector gaussian(std::size_t n, SeededRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return HyperVector(std::move(v));
}

}  // namespace

TEST_CASE("every row cleans up to itself, K <= 10") {
  SeededRng rng(10);
  for (unsigned k = 1; k <= 10; ++k) {
    const auto params = krop_params(k, ThetaScheme::uniform_random, &rng);
    const std::size_t stride = k <= 6 ? 1 : 37;
    for (std::size_t i = 0; i < params.dim(); i += stride) {
      const auto r = krop_cleanup(params, krop_row(params, i));
      REQUIRE(r.index.has_value());
      CHECK(*r.index == i);
      CHECK(r.top_score.value() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("one butterfly by hand") {
  // c_0 * 1 + s_0 * 0 and s_0 * 1 - c_0 * 0 with theta_0 = pi/3.
  const KropParams params({pi / 3});
  const auto r = krop_cleanup(params, HyperVector{1, 0}, true);
  REQUIRE(r.scores);
  CHECK((*r.scores)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK((*r.scores)[1] == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
  CHECK(*r.index == 1);
  CHECK(r.vector == krop_row(params, 1));
}

TEST_CASE("transform of e_0 is row 0") {
  const KropParams params({0.7, 2.2});
  const auto col = krop_transform(params, HyperVector::basis(4, 0));
  CHECK(max_abs_diff(col.values(), krop_row(params, 0).values()) < 1e-15);
}

TEST_CASE("transform agrees with the closed-form dense product") {
  SeededRng rng(31);
  for (unsigned k = 1; k <= 8; ++k) {
    const auto params = krop_params(k, ThetaScheme::uniform_random, &rng);
    const std::vector<double> thetas(params.thetas().begin(), params.thetas().end());
    const std::size_t n = params.dim();
    std::vector<double> dense(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = oracle::kron_entry(thetas, i, j);
    }
    const auto u = gaussian(n, rng);
    const auto want = oracle::dense_matvec(dense, n, u.vec());
    CHECK(max_abs_diff(krop_transform(params, u).values(), want) <= 1e-10 * std::sqrt(n));
  }
}

TEST_CASE("sylvester angles reduce to the scaled Walsh-Hadamard transform, K <= 10") {
  SeededRng rng(12);
  for (unsigned k = 1; k <= 10; ++k) {
    const std::size_t n = std::size_t{1} << k;
    const auto u = gaussian(n, rng);
    auto want = oracle::fwht(u.vec());
    for (double& v : want) v /= std::sqrt(static_cast<double>(n));
    const auto got = krop_transform(KropParams::sylvester(k), u);
    CHECK(max_abs_diff(got.values(), want) <= 1e-9);
  }
}

TEST_CASE("transform is an isometric involution") {
  SeededRng rng(13);
  for (unsigned k = 1; k <= 12; ++k) {
    const auto params = krop_params(k, ThetaScheme::uniform_random, &rng);
    const auto u = gaussian(params.dim(), rng);
    const auto hu = krop_transform(params, u);
    CHECK(hu.norm() == doctest::Approx(u.norm()).epsilon(1e-9));
    CHECK(max_abs_diff(krop_transform(params, hu).values(), u.values()) <= 1e-9 * u.norm());
  }
}

TEST_CASE("krop clean-up agrees with dense clean-up over 100 random inputs, K <= 10") {
  SeededRng rng(100);
  std::size_t near_ties = 0;
  for (unsigned k = 1; k <= 10; ++k) {
    const auto params = krop_params(k, ThetaScheme::evenly_spaced);
    const auto dense = krop_materialize(params);
    for (int trial = 0; trial < 100; ++trial) {
      const auto u = gaussian(params.dim(), rng);
      const auto slow = direct_cleanup(dense, u, true);
      const auto top = argmax_with_runner_up(*slow.scores);
      if (top.best - top.second <= 1e-9) {
        ++near_ties;
        continue;
      }
      const auto fast = krop_cleanup(params, u);
      CHECK(*fast.index == *slow.index);
      CHECK(max_abs_diff(fast.vector.values(), slow.vector.values()) <= 1e-12);
    }
  }
  CHECK(near_ties == 0);
}

TEST_CASE("dimension mismatch") {
  const auto params = krop_params(3, ThetaScheme::evenly_spaced);
  CHECK_THROWS_AS(krop_cleanup(params, HyperVector::zeros(4)), DimensionError);
  CHECK_THROWS_AS(krop_transform(params, HyperVector::zeros(16)), DimensionError);
  CHECK_THROWS_AS(direct_cleanup(sylvester_codebook(2), HyperVector::zeros(8)), DimensionError);
}

TEST_CASE("ties break toward the lowest index") {
  const auto params = krop_params(4, ThetaScheme::evenly_spaced);
  CHECK(*krop_cleanup(params, HyperVector::zeros(16)).index == 0);

  const ExplicitCodebook twins(CodebookFamily::normal, 3, 2, {1, 0, 1, 0, 0, 1});
  CHECK(*direct_cleanup(twins, HyperVector{1, 0}).index == 0);
}

TEST_CASE("direct clean-up") {
  const auto syl = sylvester_codebook(3);
  for (std::size_t j = 0; j < 8; ++j) CHECK(*direct_cleanup(syl, syl.row(j)).index == j);
  for (std::size_t j = 0; j < 8; ++j) CHECK(*direct_cleanup(syl, -syl.row(j)).index != j);

  std::vector<double> identity(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) identity[i * 4 + i] = 1.0;
  const ExplicitCodebook eye(CodebookFamily::normal, 4, 4, identity);
  CHECK(*direct_cleanup(eye, HyperVector{0.1, 0.9, -0.2, 0.3}).index == 1);
}

TEST_CASE("batched dense indices match single queries") {
  SeededRng rng(3);
  const auto cb = sample_normal_codebook(64, 64, rng);
  std::vector<HyperVector> queries;
  for (int i = 0; i < 300; ++i) queries.push_back(gaussian(64, rng));
  const auto batch = direct_cleanup_indices(cb, queries);
  REQUIRE(batch.size() == queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    CHECK(batch[i] == *direct_cleanup(cb, queries[i]).index);
  }
}

TEST_CASE("sign clean-up") {
  const double r = 1.0 / std::sqrt(2.0);
  const auto a = sign_cleanup(HyperVector{0.3, -0.2});
  CHECK_FALSE(a.index.has_value());
  CHECK(a.vector == HyperVector{r, -r});

  CHECK(sign_cleanup(a.vector).vector == a.vector);
  CHECK(sign_cleanup(HyperVector{0.0, -1.0}).vector == HyperVector{r, -r});
  CHECK(sign_cleanup(HyperVector{-0.0, -1.0}).vector == HyperVector{r, -r});
}

TEST_CASE("sign clean-up is idempotent and flips one entry per flipped input sign") {
  SeededRng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = gaussian(64, rng);
    const auto once = sign_cleanup(u).vector;
    CHECK(sign_cleanup(once).vector == once);

    std::vector<double> flipped = u.vec();
    const std::size_t at = rng.below(64);
    flipped[at] = -flipped[at];
    const auto other = sign_cleanup(HyperVector(flipped)).vector;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 64; ++i) changed += once[i] != other[i] ? 1 : 0;
    CHECK(changed <= 1);
  }
}

TEST_CASE("sign clean-up can land outside a sampled binary codebook") {
  // Seeded counterexample: noisy unbinding of a stored row rounds to a +-1/sqrt(N)
  // vector that is none of the N codebook rows.
  SeededRng rng(15);
  constexpr std::size_t n = 64;
  const auto cb = sample_binary_codebook(n, n, rng);
  const auto noisy = cb.row(5) + gaussian(n, rng) * (0.5 / std::sqrt(static_cast<double>(n)));
  const auto cleaned = sign_cleanup(noisy).vector;
  bool in_codebook = false;
  for (std::size_t i = 0; i < n; ++i) in_codebook = in_codebook || cb.row(i) == cleaned;
  CHECK_FALSE(in_codebook);
  CHECK(*direct_cleanup(cb, noisy).index == 5);
}
