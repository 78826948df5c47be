#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "krop/codebook.hpp"
#include "krop/memory.hpp"

namespace krop {

enum class ExperimentKind { timing, capacity, mutable_memory };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

// One (M, N = 2^k) cell of the mutable-memory experiment.
struct MemoryPair {
  std::size_t m = 0;
  unsigned k = 0;
  bool operator==(const MemoryPair&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::timing;
  unsigned k_min = 1;
  unsigned k_max = 15;
  // Capacity only: M = 2^J for J in [j_min, min(j_max, K-2)].
  unsigned j_min = 2;
  std::optional<unsigned> j_max;
  unsigned trials = 30;
  unsigned reps = 30;
  unsigned warmup = 3;
  unsigned steps = 30;
  ThetaScheme theta_scheme = ThetaScheme::evenly_spaced;
  std::uint64_t seed = 0;
  std::vector<CodebookFamily> families{CodebookFamily::normal, CodebookFamily::binary,
                                       CodebookFamily::sylvester, CodebookFamily::krop};
  std::vector<CleanupStrategy> strategies{CleanupStrategy::krop, CleanupStrategy::sign,
                                          CleanupStrategy::none};
  // Timing: dense baseline skipped above this K.
  unsigned direct_k_max = 14;
  // Capacity: normal and binary (dense clean-up) skipped above this K.
  unsigned baseline_k_max = 12;
  // Capacity: stop raising J for a (family, K) once a cell has success rate 0.
  bool prune = true;
  std::vector<MemoryPair> pairs;
  Grading grading = Grading::codebook_argmax;
  unsigned threads = 1;
  std::string out_dir;
  std::string format = "both";

  // Throws ValidationError on an inconsistent configuration.
  void validate() const;
};

// Full-scale defaults for each experiment.
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
// Fields missing from `j` keep the values already in `base`.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j, ExperimentConfig base);

struct TimingRecord {
  unsigned k = 0;
  std::size_t n = 0;
  unsigned rep = 0;
  std::string method;              // "direct" | "krop"
  std::optional<double> seconds;   // empty when skipped
  std::string index_agreement;     // "true" | "false" | "near-tie" | "skipped"
  bool operator==(const TimingRecord&) const = default;
};

struct CapacityRecord {
  std::string family;
  unsigned k = 0;
  std::size_t n = 0;
  unsigned j = 0;
  std::size_t m = 0;
  unsigned trial = 0;
  double retrieval_rate = 0.0;
  bool success = false;
  bool operator==(const CapacityRecord&) const = default;
};

struct MutableRecord {
  std::string strategy;
  std::size_t m = 0;
  std::size_t n = 0;
  unsigned trial = 0;
  unsigned step = 0;
  double retrieval_rate = 0.0;
  bool operator==(const MutableRecord&) const = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  nlohmann::ordered_json environment;
  std::vector<TimingRecord> timing;
  std::vector<CapacityRecord> capacity;
  std::vector<MutableRecord> mutable_records;
  // Derived aggregates (medians, success rates, capacities, step means).
  nlohmann::ordered_json summary;
};

using ProgressLog = std::function<void(const std::string&)>;

ExperimentReport run_timing(const ExperimentConfig& config, const ProgressLog& log = {});
ExperimentReport run_capacity(const ExperimentConfig& config, const ProgressLog& log = {});
ExperimentReport run_mutable(const ExperimentConfig& config, const ProgressLog& log = {});
ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressLog& log = {});

// ---- aggregates ----

// Median clean-up seconds per K for one method; skipped cells are absent.
std::map<unsigned, double> median_seconds(const std::vector<TimingRecord>& records,
                                          std::string_view method);

// Least-squares slope of log(seconds) against log(N) over K in [k_lo, k_hi].
double loglog_slope(const std::map<unsigned, double>& median_by_k, unsigned k_lo, unsigned k_hi);

struct CellKey {
  std::string family;
  unsigned k = 0;
  unsigned j = 0;
  auto operator<=>(const CellKey&) const = default;
};

// Fraction of trials with retrieval rate 1, per (family, K, J).
std::map<CellKey, double> success_rates(const std::vector<CapacityRecord>& records);

// Largest M whose success rate is 1, per (family, K); 0 when no cell succeeds.
std::map<std::pair<std::string, unsigned>, std::size_t> memory_capacity(
    const std::vector<CapacityRecord>& records);

// Mean retrieval rate over trials, per (strategy, M, N) and step.
std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> step_means(
    const std::vector<MutableRecord>& records);

// ---- persistence ----

std::string timing_csv(const std::vector<TimingRecord>& records);
std::string capacity_csv(const std::vector<CapacityRecord>& records);
std::string mutable_csv(const std::vector<MutableRecord>& records);
std::string report_csv(const ExperimentReport& report);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

// Writes <dir>/<experiment>.csv and/or .json per `format` (csv | json | both).
// Returns the files written.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                std::string_view format,
                                                const std::filesystem::path& dir);
ExperimentReport read_report_json(const std::filesystem::path& path);

}  // namespace krop
