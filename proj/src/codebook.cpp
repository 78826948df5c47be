#include "krop/codebook.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace krop {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_k(unsigned k, unsigned limit, const char* what) {
  if (k == 0) throw ValidationError(std::string(what) + ": K must be at least 1");
  if (k > limit) {
    throw ValidationError(std::string(what) + ": K = " + std::to_string(k) + " exceeds limit " +
                          std::to_string(limit));
  }
}

// Applies H(k+1) = [[c H, s H], [s H, -c H]] for each factor, in place in an
// N x N row-major buffer.
std::vector<double> block_recursion(std::span<const double> cosines,
                                    std::span<const double> sines) {
  const std::size_t n = std::size_t{1} << cosines.size();
  std::vector<double> m(n * n, 0.0);
  m[0] = 1.0;
  std::size_t size = 1;
  for (std::size_t k = 0; k < cosines.size(); ++k) {
    const double c = cosines[k];
    const double s = sines[k];
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t col = 0; col < size; ++col) {
        const double h = m[r * n + col];
        m[r * n + col] = c * h;
        m[r * n + col + size] = s * h;
        m[(r + size) * n + col] = s * h;
        m[(r + size) * n + col + size] = -c * h;
      }
    }
    size *= 2;
  }
  return m;
}

}  // namespace

std::string_view to_string(ThetaScheme scheme) {
  switch (scheme) {
    case ThetaScheme::evenly_spaced: return "evenly-spaced";
    case ThetaScheme::uniform_random: return "uniform-random";
  }
  return "?";
}

ThetaScheme parse_theta_scheme(std::string_view text) {
  if (text == "evenly-spaced") return ThetaScheme::evenly_spaced;
  if (text == "uniform-random") return ThetaScheme::uniform_random;
  throw ValidationError("unknown theta scheme '" + std::string(text) + "'");
}

std::string_view to_string(CodebookFamily family) {
  switch (family) {
    case CodebookFamily::normal: return "normal";
    case CodebookFamily::binary: return "binary";
    case CodebookFamily::sylvester: return "sylvester";
    case CodebookFamily::krop: return "krop";
  }
  return "?";
}

CodebookFamily parse_codebook_family(std::string_view text) {
  if (text == "normal") return CodebookFamily::normal;
  if (text == "binary") return CodebookFamily::binary;
  if (text == "sylvester") return CodebookFamily::sylvester;
  if (text == "krop") return CodebookFamily::krop;
  throw ValidationError("unknown codebook family '" + std::string(text) + "'");
}

KropParams::KropParams(std::vector<double> thetas, std::string scheme,
                       std::optional<std::uint64_t> seed)
    : thetas_(std::move(thetas)), scheme_(std::move(scheme)), seed_(seed) {
  if (thetas_.empty()) throw ValidationError("KropParams: K must be at least 1");
  if (thetas_.size() > kMaxKropK) throw ValidationError("KropParams: too many angles");
  for (std::size_t k = 0; k < thetas_.size(); ++k) {
    const double t = thetas_[k];
    if (!(t > 0.0 && t < kTwoPi)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "KropParams: theta_" << k << " = " << t << " is outside the open interval (0, 2pi)";
      throw ValidationError(msg.str());
    }
  }
}

KropParams KropParams::sylvester(unsigned k) {
  require_k(k, kMaxKropK, "KropParams::sylvester");
  return KropParams(std::vector<double>(k, std::numbers::pi / 4.0), "sylvester");
}

KropParams krop_params(unsigned k, ThetaScheme scheme, SeededRng* rng) {
  require_k(k, kMaxKropK, "krop_params");
  std::vector<double> thetas(k);
  if (scheme == ThetaScheme::evenly_spaced) {
    for (unsigned i = 0; i < k; ++i) {
      thetas[i] = static_cast<double>(i + 1) * kTwoPi / static_cast<double>(k + 1);
    }
    return KropParams(std::move(thetas), std::string(to_string(scheme)));
  }
  if (rng == nullptr) throw std::invalid_argument("krop_params: uniform-random scheme needs an rng");
  for (auto& t : thetas) {
    do {
      t = rng->uniform01() * kTwoPi;
    } while (!(t > 0.0 && t < kTwoPi));
  }
  return KropParams(std::move(thetas), std::string(to_string(scheme)), rng->seed());
}

ExplicitCodebook::ExplicitCodebook(CodebookFamily family, std::size_t rows, std::size_t dim,
                                   std::vector<double> data)
    : family_(family), rows_(rows), dim_(dim), data_(std::move(data)) {
  require_valid_dim(dim_, "ExplicitCodebook");
  if (rows_ == 0) throw std::invalid_argument("ExplicitCodebook: no rows");
  if (data_.size() != rows_ * dim_) throw DimensionError("ExplicitCodebook: data size mismatch");
}

std::span<const double> ExplicitCodebook::row_span(std::size_t i) const {
  if (i >= rows_) throw std::out_of_range("ExplicitCodebook: row index out of range");
  return std::span<const double>(data_).subspan(i * dim_, dim_);
}

HyperVector ExplicitCodebook::row(std::size_t i) const {
  const auto r = row_span(i);
  return HyperVector(std::vector<double>(r.begin(), r.end()));
}

HyperVector krop_row(const KropParams& params, std::size_t index) {
  const std::size_t n = params.dim();
  if (index >= n) {
    throw std::out_of_range("krop_row: index " + std::to_string(index) + " out of range for N = " +
                            std::to_string(n));
  }
  std::vector<double> v(n);
  v[0] = 1.0;
  std::size_t len = 1;
  for (unsigned k = 0; k < params.k(); ++k) {
    const double c = std::cos(params.thetas()[k]);
    const double s = std::sin(params.thetas()[k]);
    const bool bit = ((index >> k) & 1u) != 0;
    const double head = bit ? s : c;
    const double tail = bit ? -c : s;
    for (std::size_t j = 0; j < len; ++j) v[len + j] = tail * v[j];
    for (std::size_t j = 0; j < len; ++j) v[j] *= head;
    len *= 2;
  }
  return HyperVector(std::move(v));
}

ExplicitCodebook krop_materialize(const KropParams& params) {
  require_k(params.k(), kMaxMaterializeK, "krop_materialize");
  std::vector<double> cosines;
  std::vector<double> sines;
  for (double t : params.thetas()) {
    cosines.push_back(std::cos(t));
    sines.push_back(std::sin(t));
  }
  const std::size_t n = params.dim();
  return ExplicitCodebook(CodebookFamily::krop, n, n, block_recursion(cosines, sines));
}

ExplicitCodebook sylvester_codebook(unsigned k) {
  require_k(k, kMaxMaterializeK, "sylvester_codebook");
  const std::vector<double> ones(k, 1.0);
  auto data = block_recursion(ones, ones);
  const std::size_t n = std::size_t{1} << k;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : data) v *= scale;
  return ExplicitCodebook(CodebookFamily::sylvester, n, n, std::move(data));
}

HyperVector sample_normal_vector(std::size_t dim, SeededRng& rng) {
  require_valid_dim(dim, "sample_normal_vector");
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal(0.0, stddev);
  return HyperVector(std::move(v));
}

ExplicitCodebook sample_normal_codebook(std::size_t dim, std::size_t count, SeededRng& rng) {
  require_valid_dim(dim, "sample_normal_codebook");
  if (count == 0) throw std::invalid_argument("sample_normal_codebook: count must be >= 1");
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> data(dim * count);
  for (double& x : data) x = rng.normal(0.0, stddev);
  return ExplicitCodebook(CodebookFamily::normal, count, dim, std::move(data));
}

ExplicitCodebook sample_binary_codebook(std::size_t dim, std::size_t count, SeededRng& rng) {
  require_valid_dim(dim, "sample_binary_codebook");
  if (count == 0) throw std::invalid_argument("sample_binary_codebook: count must be >= 1");
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> data(dim * count);
  for (double& x : data) x = rng.coin() ? magnitude : -magnitude;
  return ExplicitCodebook(CodebookFamily::binary, count, dim, std::move(data));
}

std::string params_to_json(const KropParams& params) {
  nlohmann::ordered_json j;
  j["K"] = params.k();
  j["thetas"] = std::vector<double>(params.thetas().begin(), params.thetas().end());
  j["scheme"] = params.scheme();
  if (params.seed()) {
    j["seed"] = *params.seed();
  } else {
    j["seed"] = nullptr;
  }
  return j.dump(2) + "\n";
}

KropParams params_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("malformed params file: ") + e.what());
  }
  try {
    const auto k = j.at("K").get<long long>();
    if (k < 1) throw ValidationError("params file: K must be at least 1");
    auto thetas = j.at("thetas").get<std::vector<double>>();
    if (thetas.size() != static_cast<std::size_t>(k)) {
      throw ValidationError("params file: K does not match the number of thetas");
    }
    std::string scheme = j.contains("scheme") && j["scheme"].is_string()
                             ? j["scheme"].get<std::string>()
                             : std::string("custom");
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    return KropParams(std::move(thetas), std::move(scheme), seed);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed params file: ") + e.what());
  }
}

void save_params(const KropParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << params_to_json(params);
  if (!out) throw IoError("failed writing " + path.string());
}

KropParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return params_from_json(buffer.str());
}

}  // namespace krop
