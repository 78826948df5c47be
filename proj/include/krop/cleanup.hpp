#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "krop/codebook.hpp"
#include "krop/hypervector.hpp"

namespace krop {

struct CleanupResult {
  // Row index i*; empty for sign clean-up and for "none".
  std::optional<std::size_t> index;
  // Cleaned vector; equals the codebook row at `index` when one is present.
  HyperVector vector;
  // Score of the winning row.
  std::optional<double> top_score;
  // Full score sequence Vu, only when requested.
  std::optional<std::vector<double>> scores;
};

struct ArgmaxResult {
  std::size_t index = 0;
  double best = 0.0;
  // Runner-up score; equal to best for single-element input.
  double second = 0.0;
};

// First index of the maximum (ties go to the lowest index) plus the runner-up.
// Throws ValidationError on NaN.
ArgmaxResult argmax_with_runner_up(std::span<const double> scores);

// Scores H u for the codebook defined by `params`, without forming H.
//
// Layout: one working copy of u, length N. At level k (K down to 1) the buffer
// holds N / 2^k contiguous blocks of length 2^k. Block i is split into halves
// (lo, hi) and rewritten in place as
//   lo' = c_{k-1} lo + s_{k-1} hi
//   hi' = s_{k-1} lo - c_{k-1} hi
// which are exactly blocks 2i and 2i+1 of the next level, so no reindexing is
// needed and the final buffer is H u in natural row order. 3N flops per level.
HyperVector krop_transform(const KropParams& params, const HyperVector& u);

// In-place variant over a caller-owned buffer of length 2^K.
void krop_transform_inplace(const KropParams& params, std::span<double> buffer);

// argmax_i (H u)_i with the winning row rebuilt from the angles. O(N log N).
CleanupResult krop_cleanup(const KropParams& params, const HyperVector& u,
                           bool keep_scores = false);

// Dense V u then argmax. O(N |V|).
CleanupResult direct_cleanup(const ExplicitCodebook& codebook, const HyperVector& u,
                             bool keep_scores = false);

// argmax indices for many queries at once (one matrix-matrix product).
std::vector<std::size_t> direct_cleanup_indices(const ExplicitCodebook& codebook,
                                                std::span<const HyperVector> queries);

// u -> sign(u) / sqrt(N), with sign(0) = +1.
CleanupResult sign_cleanup(const HyperVector& u);

}  // namespace krop
