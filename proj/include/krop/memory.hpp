#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "krop/cleanup.hpp"
#include "krop/codebook.hpp"
#include "krop/hrr.hpp"

namespace krop {

enum class CleanupStrategy { krop, sign, none, direct };

std::string_view to_string(CleanupStrategy strategy);
CleanupStrategy parse_cleanup_strategy(std::string_view text);

// Implicit (angles) or explicit value codebook.
using ValueCodebook = std::variant<KropParams, ExplicitCodebook>;

// Symbolic ground truth: the latest value index written under each key index.
class ReferenceMemory {
 public:
  void set(std::size_t key, std::size_t value) { entries_[key] = value; }
  std::optional<std::size_t> get(std::size_t key) const;
  bool contains(std::size_t key) const { return entries_.contains(key); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<std::size_t, std::size_t>& entries() const noexcept { return entries_; }

 private:
  std::map<std::size_t, std::size_t> entries_;
};

// How retrieval_rate decides that a read recalled the stored value.
enum class Grading {
  // krop/direct: same row; sign: cleaned vector equals the stored row exactly;
  // none: argmax of direct scores against every value row.
  by_strategy,
  // argmax of direct scores of the raw unbound vector against every value row,
  // whatever the strategy.
  codebook_argmax,
};

std::string_view to_string(Grading grading);
Grading parse_grading(std::string_view text);

// Key-value memory over one trace. Single writer; const reads are safe to
// share between threads while no write is in flight.
class AssociativeStore {
 public:
  AssociativeStore(ExplicitCodebook keys, ValueCodebook values, CleanupStrategy strategy);

  std::size_t dim() const noexcept { return trace_.dim(); }
  std::size_t key_count() const noexcept { return keys_.size(); }
  std::size_t value_count() const noexcept;
  CleanupStrategy strategy() const noexcept { return strategy_; }
  const MemoryTrace& trace() const noexcept { return trace_; }
  const ReferenceMemory& reference() const noexcept { return reference_; }
  const ExplicitCodebook& keys() const noexcept { return keys_; }
  const ValueCodebook& values() const noexcept { return values_; }

  HyperVector key_vector(std::size_t key) const;
  HyperVector value_vector(std::size_t value) const;

  // trace += key (*) value, and the reference records the pair.
  void write(std::size_t key, std::size_t value);

  // key (#) trace, cleaned up by the store's strategy ("none" returns it raw).
  CleanupResult read(std::size_t key) const;

  // v_old = read(key); trace += key (*) v_new - key (*) v_old. Returns the
  // clean-up result used as v_old. Throws if the key was never written.
  CleanupResult overwrite(std::size_t key, std::size_t new_value);

  // Zeroes the trace but keeps the reference.
  void clear_trace() { trace_.clear(); }

 private:
  std::size_t require_key(std::size_t key) const;
  std::size_t require_value(std::size_t value) const;

  ExplicitCodebook keys_;
  ValueCodebook values_;
  CleanupStrategy strategy_;
  MemoryTrace trace_;
  ReferenceMemory reference_;
};

// Fraction of keys in `reference` whose read recalls the recorded value.
double retrieval_rate(const AssociativeStore& store, const ReferenceMemory& reference,
                      Grading grading = Grading::by_strategy);
inline double retrieval_rate(const AssociativeStore& store, Grading grading = Grading::by_strategy) {
  return retrieval_rate(store, store.reference(), grading);
}

}  // namespace krop
