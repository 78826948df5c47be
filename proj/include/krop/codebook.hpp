#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krop/hypervector.hpp"
#include "krop/rng.hpp"

namespace krop {

enum class ThetaScheme { evenly_spaced, uniform_random };

std::string_view to_string(ThetaScheme scheme);
ThetaScheme parse_theta_scheme(std::string_view text);

// The K angles that define the 2^K x 2^K Kronecker rotation product codebook.
// Factor k is [[cos t_k, sin t_k], [sin t_k, -cos t_k]]; factor K-1 is the
// outermost (most significant index bit).
class KropParams {
 public:
  explicit KropParams(std::vector<double> thetas, std::string scheme = "custom",
                      std::optional<std::uint64_t> seed = std::nullopt);

  // All angles pi/4: the Sylvester Hadamard matrix with unit-norm rows.
  static KropParams sylvester(unsigned k);

  unsigned k() const noexcept { return static_cast<unsigned>(thetas_.size()); }
  std::size_t dim() const noexcept { return std::size_t{1} << thetas_.size(); }
  std::span<const double> thetas() const noexcept { return thetas_; }
  const std::string& scheme() const noexcept { return scheme_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  bool operator==(const KropParams&) const = default;

 private:
  std::vector<double> thetas_;
  std::string scheme_;
  std::optional<std::uint64_t> seed_;
};

// Largest K for which the 64-bit index space and angle list make sense.
inline constexpr unsigned kMaxKropK = 40;
// Largest K that may be materialized densely (4^K doubles).
inline constexpr unsigned kMaxMaterializeK = 14;

// evenly_spaced: t_k = (k+1) * 2pi / (K+1). uniform_random: i.i.d. in (0, 2pi),
// needs rng.
KropParams krop_params(unsigned k, ThetaScheme scheme, SeededRng* rng = nullptr);

enum class CodebookFamily { normal, binary, sylvester, krop };

std::string_view to_string(CodebookFamily family);
CodebookFamily parse_codebook_family(std::string_view text);

// Dense row-major list of embeddings; row i embeds symbol i.
class ExplicitCodebook {
 public:
  ExplicitCodebook(CodebookFamily family, std::size_t rows, std::size_t dim,
                   std::vector<double> data);

  CodebookFamily family() const noexcept { return family_; }
  std::size_t size() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row_span(std::size_t i) const;
  HyperVector row(std::size_t i) const;
  std::span<const double> data() const noexcept { return data_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

 private:
  CodebookFamily family_;
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> data_;
};

// Row i of the krop codebook from the angles alone: start from [1] and for
// k = 0..K-1 replace v by [c_k v, s_k v] when bit k of i is 0, or by
// [s_k v, -c_k v] when it is 1. O(N) time and space.
HyperVector krop_row(const KropParams& params, std::size_t index);

// Full matrix through the block recursion H(k+1) = [[c H, s H], [s H, -c H]].
// Test oracle and direct-clean-up baseline only.
ExplicitCodebook krop_materialize(const KropParams& params);

// Rows of the Sylvester Hadamard matrix H^(K) scaled by 1/sqrt(N).
ExplicitCodebook sylvester_codebook(unsigned k);

ExplicitCodebook sample_normal_codebook(std::size_t dim, std::size_t count, SeededRng& rng);
ExplicitCodebook sample_binary_codebook(std::size_t dim, std::size_t count, SeededRng& rng);

// One vector with i.i.d. N(0, 1/N) entries.
HyperVector sample_normal_vector(std::size_t dim, SeededRng& rng);

// {"K": int, "thetas": [...], "scheme": str, "seed": int|null}; angles keep
// all 64 bits through the round trip.
void save_params(const KropParams& params, const std::filesystem::path& path);
KropParams load_params(const std::filesystem::path& path);
std::string params_to_json(const KropParams& params);
KropParams params_from_json(std::string_view text);

}  // namespace krop
