#include "krop/memory.hpp"

#include <stdexcept>
#include <string>

namespace krop {

std::string_view to_string(CleanupStrategy strategy) {
  switch (strategy) {
    case CleanupStrategy::krop: return "krop";
    case CleanupStrategy::sign: return "sign";
    case CleanupStrategy::none: return "none";
    case CleanupStrategy::direct: return "direct";
  }
  return "?";
}

CleanupStrategy parse_cleanup_strategy(std::string_view text) {
  if (text == "krop") return CleanupStrategy::krop;
  if (text == "sign") return CleanupStrategy::sign;
  if (text == "none") return CleanupStrategy::none;
  if (text == "direct") return CleanupStrategy::direct;
  throw ValidationError("unknown clean-up strategy '" + std::string(text) + "'");
}

std::string_view to_string(Grading grading) {
  return grading == Grading::by_strategy ? "by-strategy" : "codebook-argmax";
}

Grading parse_grading(std::string_view text) {
  if (text == "by-strategy") return Grading::by_strategy;
  if (text == "codebook-argmax") return Grading::codebook_argmax;
  throw ValidationError("unknown grading rule '" + std::string(text) + "'");
}

std::optional<std::size_t> ReferenceMemory::get(std::size_t key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::size_t codebook_dim(const ValueCodebook& values) {
  return std::visit([](const auto& v) { return v.dim(); }, values);
}

}  // namespace

AssociativeStore::AssociativeStore(ExplicitCodebook keys, ValueCodebook values,
                                   CleanupStrategy strategy)
    : keys_(std::move(keys)),
      values_(std::move(values)),
      strategy_(strategy),
      trace_(keys_.dim()) {
  if (codebook_dim(values_) != keys_.dim()) {
    throw DimensionError("AssociativeStore: key and value codebooks differ in dimension");
  }
  const bool implicit = std::holds_alternative<KropParams>(values_);
  if (strategy_ == CleanupStrategy::krop && !implicit) {
    throw std::invalid_argument("AssociativeStore: krop clean-up needs KropParams values");
  }
  if ((strategy_ == CleanupStrategy::direct || strategy_ == CleanupStrategy::sign) && implicit) {
    throw std::invalid_argument("AssociativeStore: " + std::string(to_string(strategy_)) +
                                " clean-up needs an explicit value codebook");
  }
}

std::size_t AssociativeStore::value_count() const noexcept {
  return std::visit([](const auto& v) -> std::size_t {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, KropParams>) {
      return v.dim();
    } else {
      return v.size();
    }
  }, values_);
}

std::size_t AssociativeStore::require_key(std::size_t key) const {
  if (key >= keys_.size()) {
    throw std::out_of_range("key index " + std::to_string(key) + " out of range");
  }
  return key;
}

std::size_t AssociativeStore::require_value(std::size_t value) const {
  if (value >= value_count()) {
    throw std::out_of_range("value index " + std::to_string(value) + " out of range");
  }
  return value;
}

HyperVector AssociativeStore::key_vector(std::size_t key) const {
  return keys_.row(require_key(key));
}

HyperVector AssociativeStore::value_vector(std::size_t value) const {
  require_value(value);
  if (const auto* params = std::get_if<KropParams>(&values_)) return krop_row(*params, value);
  return std::get<ExplicitCodebook>(values_).row(value);
}

void AssociativeStore::write(std::size_t key, std::size_t value) {
  const HyperVector a = key_vector(key);
  const HyperVector v = value_vector(value);
  trace_.bind_add(a, v);
  reference_.set(key, value);
}

CleanupResult AssociativeStore::read(std::size_t key) const {
  HyperVector u = trace_.unbind(key_vector(key));
  switch (strategy_) {
    case CleanupStrategy::krop: return krop_cleanup(std::get<KropParams>(values_), u);
    case CleanupStrategy::direct: return direct_cleanup(std::get<ExplicitCodebook>(values_), u);
    case CleanupStrategy::sign: return sign_cleanup(u);
    case CleanupStrategy::none: break;
  }
  return CleanupResult{std::nullopt, std::move(u), std::nullopt, std::nullopt};
}

CleanupResult AssociativeStore::overwrite(std::size_t key, std::size_t new_value) {
  require_key(key);
  require_value(new_value);
  if (!reference_.contains(key)) {
    throw std::logic_error("overwrite: key " + std::to_string(key) + " has not been written");
  }
  const HyperVector a = key_vector(key);
  CleanupResult old = read(key);
  trace_.bind_subtract(a, old.vector);
  trace_.bind_add(a, value_vector(new_value));
  reference_.set(key, new_value);
  return old;
}

namespace {

// Indices of argmax_i <row_i, u> over every value row.
std::vector<std::size_t> codebook_argmax(const ValueCodebook& values,
                                         std::span<const HyperVector> raw) {
  if (const auto* params = std::get_if<KropParams>(&values)) {
    std::vector<std::size_t> out;
    out.reserve(raw.size());
    for (const auto& u : raw) {
      out.push_back(argmax_with_runner_up(krop_transform(*params, u).values()).index);
    }
    return out;
  }
  return direct_cleanup_indices(std::get<ExplicitCodebook>(values), raw);
}

}  // namespace

double retrieval_rate(const AssociativeStore& store, const ReferenceMemory& reference,
                      Grading grading) {
  if (reference.empty()) throw std::invalid_argument("retrieval_rate: reference memory is empty");

  std::vector<std::size_t> keys;
  std::vector<std::size_t> expected;
  for (const auto& [key, value] : reference.entries()) {
    keys.push_back(key);
    expected.push_back(value);
  }

  // Index-based grading counts a hit when the recalled row is the stored row,
  // so duplicate rows in a sampled codebook do not count against the memory.
  auto same_row = [&](std::size_t got, std::size_t want) {
    return got == want || store.value_vector(got) == store.value_vector(want);
  };

  std::size_t hits = 0;
  const CleanupStrategy strategy = store.strategy();
  const bool raw_argmax = grading == Grading::codebook_argmax ||
                          strategy == CleanupStrategy::none ||
                          strategy == CleanupStrategy::direct;
  if (raw_argmax) {
    std::vector<HyperVector> raw;
    raw.reserve(keys.size());
    for (std::size_t key : keys) raw.push_back(store.trace().unbind(store.key_vector(key)));
    const auto got = codebook_argmax(store.values(), raw);
    for (std::size_t i = 0; i < keys.size(); ++i) hits += same_row(got[i], expected[i]) ? 1 : 0;
  } else if (strategy == CleanupStrategy::krop) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      hits += same_row(*store.read(keys[i]).index, expected[i]) ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      hits += store.read(keys[i]).vector == store.value_vector(expected[i]) ? 1 : 0;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(keys.size());
}

}  // namespace krop
