#include "krop/cleanup.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace krop {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> as_matrix(const ExplicitCodebook& codebook) {
  return Eigen::Map<const RowMajorMatrix>(codebook.data().data(),
                                          static_cast<Eigen::Index>(codebook.size()),
                                          static_cast<Eigen::Index>(codebook.dim()));
}

void require_params_dim(const KropParams& params, std::size_t n, const char* what) {
  if (params.dim() != n) {
    throw DimensionError(std::string(what) + ": vector length " + std::to_string(n) +
                         " does not match codebook dimension 2^" + std::to_string(params.k()));
  }
}

}  // namespace

ArgmaxResult argmax_with_runner_up(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax: empty scores");
  ArgmaxResult r;
  r.best = -std::numeric_limits<double>::infinity();
  r.second = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (std::isnan(s)) throw ValidationError("argmax: NaN score");
    if (s > r.best) {
      r.second = r.best;
      r.best = s;
      r.index = i;
    } else if (s > r.second) {
      r.second = s;
    }
  }
  if (scores.size() == 1) r.second = r.best;
  return r;
}

void krop_transform_inplace(const KropParams& params, std::span<double> buffer) {
  require_params_dim(params, buffer.size(), "krop_transform");
  const std::size_t n = buffer.size();
  double* x = buffer.data();
  for (unsigned k = params.k(); k >= 1; --k) {
    const double c = std::cos(params.thetas()[k - 1]);
    const double s = std::sin(params.thetas()[k - 1]);
    const std::size_t half = std::size_t{1} << (k - 1);
    for (std::size_t start = 0; start < n; start += 2 * half) {
      double* lo = x + start;
      double* hi = lo + half;
      for (std::size_t j = 0; j < half; ++j) {
        const double a = lo[j];
        const double b = hi[j];
        lo[j] = c * a + s * b;
        hi[j] = s * a - c * b;
      }
    }
  }
}

HyperVector krop_transform(const KropParams& params, const HyperVector& u) {
  std::vector<double> buffer = u.vec();
  krop_transform_inplace(params, buffer);
  return HyperVector(std::move(buffer));
}

CleanupResult krop_cleanup(const KropParams& params, const HyperVector& u, bool keep_scores) {
  std::vector<double> buffer = u.vec();
  krop_transform_inplace(params, buffer);
  const auto top = argmax_with_runner_up(buffer);
  CleanupResult result{top.index, krop_row(params, top.index), top.best, std::nullopt};
  if (keep_scores) result.scores = std::move(buffer);
  return result;
}

CleanupResult direct_cleanup(const ExplicitCodebook& codebook, const HyperVector& u,
                             bool keep_scores) {
  if (codebook.dim() != u.dim()) {
    throw DimensionError("direct_cleanup: vector length " + std::to_string(u.dim()) +
                         " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
  std::vector<double> scores(codebook.size());
  Eigen::Map<Eigen::VectorXd> out(scores.data(), static_cast<Eigen::Index>(scores.size()));
  Eigen::Map<const Eigen::VectorXd> in(u.data(), static_cast<Eigen::Index>(u.dim()));
  out.noalias() = as_matrix(codebook) * in;
  const auto top = argmax_with_runner_up(scores);
  CleanupResult result{top.index, codebook.row(top.index), top.best, std::nullopt};
  if (keep_scores) result.scores = std::move(scores);
  return result;
}

std::vector<std::size_t> direct_cleanup_indices(const ExplicitCodebook& codebook,
                                                std::span<const HyperVector> queries) {
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> indices;
  indices.reserve(queries.size());
  const auto v = as_matrix(codebook);
  const auto dim = static_cast<Eigen::Index>(codebook.dim());
  for (std::size_t first = 0; first < queries.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, queries.size() - first);
    Eigen::MatrixXd q(dim, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
      const HyperVector& u = queries[first + j];
      if (u.dim() != codebook.dim()) throw DimensionError("direct_cleanup_indices: dimension mismatch");
      q.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>(u.data(), dim);
    }
    // Column j holds the scores of query j against every row.
    const Eigen::MatrixXd scores = v * q;
    for (std::size_t j = 0; j < count; ++j) {
      const auto col = scores.col(static_cast<Eigen::Index>(j));
      indices.push_back(argmax_with_runner_up(std::span<const double>(col.data(), col.size())).index);
    }
  }
  return indices;
}

CleanupResult sign_cleanup(const HyperVector& u) {
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(u.dim()));
  std::vector<double> out(u.dim());
  for (std::size_t i = 0; i < u.dim(); ++i) out[i] = u[i] < 0.0 ? -magnitude : magnitude;
  return CleanupResult{std::nullopt, HyperVector(std::move(out)), std::nullopt, std::nullopt};
}

}  // namespace krop
