#include "krop/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <new>
#include <sstream>
#include <thread>
#include <tuple>

#include "krop/cleanup.hpp"
#include "krop/hrr.hpp"

namespace krop {

// Declared in report.cpp.
nlohmann::ordered_json environment_stamp();

namespace {

constexpr double kNearTieMargin = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void note(const ProgressLog& log, const std::string& message) {
  if (log) log(message);
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Results are
// written by index, so the outcome never depends on scheduling.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// MemAvailable from /proc/meminfo in bytes, if readable.
std::optional<std::uint64_t> available_memory() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  std::uint64_t value = 0;
  std::string unit;
  while (in >> key >> value >> unit) {
    if (key == "MemAvailable:") return value * 1024;
  }
  return std::nullopt;
}

bool dense_fits(unsigned k) {
  const double bytes = 8.0 * std::ldexp(1.0, 2 * static_cast<int>(k));
  const auto avail = available_memory();
  return !avail || bytes <= 0.8 * static_cast<double>(*avail);
}

HyperVector standard_normal_vector(std::size_t n, SeededRng& rng) {
  std::vector<double> u(n);
  for (double& x : u) x = rng.normal();
  return HyperVector(std::move(u));
}

std::uint64_t tag(std::string_view name) { return stream_tag(name); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::timing: return "timing";
    case ExperimentKind::capacity: return "capacity";
    case ExperimentKind::mutable_memory: return "mutable";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "timing") return ExperimentKind::timing;
  if (text == "capacity") return ExperimentKind::capacity;
  if (text == "mutable") return ExperimentKind::mutable_memory;
  throw ValidationError("unknown experiment '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (k_min < 1 || k_min > k_max) {
    throw ValidationError("empty or invalid K range [" + std::to_string(k_min) + ", " +
                          std::to_string(k_max) + "]");
  }
  if (k_max > 30) throw ValidationError("K range exceeds 30");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (format != "csv" && format != "json" && format != "both") {
    throw ValidationError("format must be csv, json or both");
  }
  switch (experiment) {
    case ExperimentKind::timing:
      if (reps < 1) throw ValidationError("reps must be >= 1");
      break;
    case ExperimentKind::capacity:
      if (families.empty()) throw ValidationError("no codebook families selected");
      if (j_max && *j_max < j_min) throw ValidationError("empty J range");
      if (k_max < j_min + 2) {
        throw ValidationError("no capacity cell satisfies J <= K-2 in the configured ranges");
      }
      break;
    case ExperimentKind::mutable_memory:
      if (strategies.empty()) throw ValidationError("no strategies selected");
      for (auto s : strategies) {
        if (s == CleanupStrategy::direct) {
          throw ValidationError("mutable experiment strategies are krop, sign and none");
        }
      }
      if (pairs.empty()) throw ValidationError("no (M, N) pairs configured");
      for (const auto& p : pairs) {
        if (p.m < 1 || p.k < 1 || p.k > 20) throw ValidationError("invalid (M, N) pair");
      }
      if (steps < 1) throw ValidationError("steps must be >= 1");
      break;
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::timing:
      c.k_min = 1;
      c.k_max = 15;
      c.reps = 30;
      c.threads = 1;
      break;
    case ExperimentKind::capacity:
      c.k_min = 2;
      c.k_max = 15;
      c.trials = 30;
      c.threads = std::max(1u, std::thread::hardware_concurrency());
      break;
    case ExperimentKind::mutable_memory:
      c.k_min = 10;
      c.k_max = 12;
      c.trials = 10;
      c.steps = 30;
      c.pairs = {{16, 10}, {32, 12}};
      c.threads = std::max(1u, std::thread::hardware_concurrency());
      break;
  }
  return c;
}

// ---------------------------------------------------------------- timing

ExperimentReport run_timing(const ExperimentConfig& config, const ProgressLog& log) {
  config.validate();
  ExperimentReport report{config, environment_stamp(), {}, {}, {}, {}};
  auto& per_k = report.summary["per_k"];
  per_k = nlohmann::ordered_json::array();
  std::size_t near_ties = 0;
  std::size_t disagreements = 0;

  for (unsigned k = config.k_min; k <= config.k_max; ++k) {
    const std::size_t n = std::size_t{1} << k;
    SeededRng param_rng = SeededRng::substream(config.seed, {tag("timing"), k, tag("params")});
    const KropParams params = krop_params(k, config.theta_scheme, &param_rng);

    std::optional<ExplicitCodebook> dense;
    std::string skip_reason;
    double materialize_seconds = std::nan("");
    if (k > config.direct_k_max || k > kMaxMaterializeK) {
      skip_reason = "K above direct cap";
    } else if (!dense_fits(k)) {
      skip_reason = "dense matrix exceeds available memory";
    } else {
      try {
        const auto start = Clock::now();
        dense.emplace(krop_materialize(params));
        materialize_seconds = seconds_since(start);
      } catch (const std::bad_alloc&) {
        skip_reason = "allocation failed";
      }
    }
    note(log, "timing K=" + std::to_string(k) +
                  (dense ? "" : " (direct skipped: " + skip_reason + ")"));

    for (unsigned w = 0; w < config.warmup; ++w) {
      SeededRng rng = SeededRng::substream(config.seed, {tag("timing"), k, tag("warmup"), w});
      const HyperVector u = standard_normal_vector(n, rng);
      (void)krop_cleanup(params, u);
      if (dense) (void)direct_cleanup(*dense, u);
    }

    std::vector<TimingRecord> rows(2 * static_cast<std::size_t>(config.reps));
    std::atomic<std::size_t> ties{0};
    std::atomic<std::size_t> wrong{0};
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
      SeededRng rng = SeededRng::substream(config.seed, {tag("timing"), k, rep});
      const HyperVector u = standard_normal_vector(n, rng);

      auto start = Clock::now();
      const CleanupResult fast = krop_cleanup(params, u);
      const double krop_seconds = seconds_since(start);

      TimingRecord direct_row{k, n, static_cast<unsigned>(rep), "direct", std::nullopt, "skipped"};
      std::string agreement = "skipped";
      if (dense) {
        start = Clock::now();
        const CleanupResult slow = direct_cleanup(*dense, u, true);
        direct_row.seconds = seconds_since(start);
        const auto top = argmax_with_runner_up(*slow.scores);
        if (top.best - top.second <= kNearTieMargin) ++ties;
        if (*slow.index == *fast.index) {
          agreement = "true";
        } else if (top.best - top.second <= kNearTieMargin) {
          agreement = "near-tie";
        } else {
          agreement = "false";
          ++wrong;
        }
        direct_row.index_agreement = agreement;
      }
      rows[2 * rep] = direct_row;
      rows[2 * rep + 1] = TimingRecord{k, n, static_cast<unsigned>(rep), "krop", krop_seconds,
                                       agreement};
    });
    near_ties += ties;
    disagreements += wrong;
    report.timing.insert(report.timing.end(), rows.begin(), rows.end());

    nlohmann::ordered_json cell;
    cell["K"] = k;
    cell["N"] = n;
    cell["direct_skipped"] = !dense.has_value();
    if (!dense) cell["skip_reason"] = skip_reason;
    if (dense) cell["materialize_seconds"] = materialize_seconds;
    cell["near_ties"] = ties.load();
    cell["disagreements"] = wrong.load();
    per_k.push_back(cell);
  }

  auto& medians = report.summary["median_seconds"];
  for (const char* method : {"direct", "krop"}) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : median_seconds(report.timing, method)) m[std::to_string(k)] = v;
    medians[method] = m;
  }
  report.summary["near_ties"] = near_ties;
  report.summary["disagreements"] = disagreements;
  report.summary["timed_region"] =
      "clean-up call only (dense matvec + argmax vs butterfly + argmax + row rebuild); "
      "dense materialization timed separately";
  return report;
}

// ---------------------------------------------------------------- capacity

namespace {

double capacity_trial(const ExperimentConfig& config, CodebookFamily family, unsigned k,
                      unsigned j, unsigned trial) {
  const std::size_t n = std::size_t{1} << k;
  const std::size_t m = std::size_t{1} << j;
  SeededRng rng = SeededRng::substream(
      config.seed, {tag("capacity"), tag(to_string(family)), k, j, trial});

  std::optional<ValueCodebook> values;
  CleanupStrategy strategy = CleanupStrategy::krop;
  switch (family) {
    case CodebookFamily::krop:
      values.emplace(krop_params(k, config.theta_scheme, &rng));
      break;
    case CodebookFamily::sylvester:
      values.emplace(KropParams::sylvester(k));
      break;
    case CodebookFamily::normal:
      values.emplace(sample_normal_codebook(n, n, rng));
      strategy = CleanupStrategy::direct;
      break;
    case CodebookFamily::binary:
      values.emplace(sample_binary_codebook(n, n, rng));
      strategy = CleanupStrategy::direct;
      break;
  }
  // Keys are fresh N(0, 1/N) vectors, one per stored pair.
  ExplicitCodebook keys = sample_normal_codebook(n, m, rng);
  AssociativeStore store(std::move(keys), std::move(*values), strategy);
  for (std::size_t i = 0; i < m; ++i) store.write(i, rng.below(n));
  return retrieval_rate(store);
}

}  // namespace

ExperimentReport run_capacity(const ExperimentConfig& config, const ProgressLog& log) {
  config.validate();
  ExperimentReport report{config, environment_stamp(), {}, {}, {}, {}};
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();

  for (CodebookFamily family : config.families) {
    const std::string name(to_string(family));
    const bool dense = family == CodebookFamily::normal || family == CodebookFamily::binary;
    for (unsigned k = config.k_min; k <= config.k_max; ++k) {
      if (k < config.j_min + 2) continue;
      const unsigned j_hi = std::min(k - 2, config.j_max.value_or(k - 2));
      if (dense && k > config.baseline_k_max) {
        skipped.push_back({{"family", name}, {"K", k}, {"reason", "K above baseline cap"}});
        continue;
      }
      for (unsigned j = config.j_min; j <= j_hi; ++j) {
        std::vector<double> rates(config.trials);
        parallel_for(config.trials, config.threads, [&](std::size_t t) {
          rates[t] = capacity_trial(config, family, k, j, static_cast<unsigned>(t));
        });
        std::size_t successes = 0;
        for (unsigned t = 0; t < config.trials; ++t) {
          const bool ok = rates[t] == 1.0;
          successes += ok ? 1 : 0;
          report.capacity.push_back(CapacityRecord{name, k, std::size_t{1} << k, j,
                                                   std::size_t{1} << j, t, rates[t], ok});
        }
        note(log, "capacity " + name + " K=" + std::to_string(k) + " J=" + std::to_string(j) +
                      " success=" + std::to_string(successes) + "/" +
                      std::to_string(config.trials));
        if (config.prune && successes == 0 && j < j_hi) {
          skipped.push_back({{"family", name},
                             {"K", k},
                             {"J_from", j + 1},
                             {"J_to", j_hi},
                             {"reason", "pruned after a cell with success rate 0"}});
          break;
        }
      }
    }
  }

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& [key, rate] : success_rates(report.capacity)) {
    cells.push_back({{"family", key.family},
                     {"K", key.k},
                     {"J", key.j},
                     {"M", std::size_t{1} << key.j},
                     {"success_rate", rate}});
  }
  nlohmann::ordered_json capacity = nlohmann::ordered_json::array();
  for (const auto& [key, m] : memory_capacity(report.capacity)) {
    capacity.push_back({{"family", key.first}, {"K", key.second}, {"capacity", m}});
  }
  report.summary["success_rates"] = cells;
  report.summary["capacity"] = capacity;
  report.summary["skipped"] = skipped;
  return report;
}

// ---------------------------------------------------------------- mutable

namespace {

std::vector<double> mutable_trial(const ExperimentConfig& config, CleanupStrategy strategy,
                                  const MemoryPair& pair, unsigned trial) {
  const std::size_t n = std::size_t{1} << pair.k;
  SeededRng rng = SeededRng::substream(
      config.seed, {tag("mutable"), tag(to_string(strategy)), pair.m, pair.k, trial});

  std::optional<ValueCodebook> values;
  switch (strategy) {
    case CleanupStrategy::krop: values.emplace(krop_params(pair.k, config.theta_scheme, &rng)); break;
    case CleanupStrategy::sign: values.emplace(sample_binary_codebook(n, n, rng)); break;
    default: values.emplace(sample_normal_codebook(n, n, rng)); break;
  }
  ExplicitCodebook keys = sample_normal_codebook(n, pair.m, rng);
  AssociativeStore store(std::move(keys), std::move(*values), strategy);

  for (std::size_t key = 0; key < pair.m; ++key) store.write(key, rng.below(n));
  std::vector<double> rates;
  rates.reserve(config.steps + 1);
  rates.push_back(retrieval_rate(store, config.grading));
  for (unsigned step = 1; step <= config.steps; ++step) {
    const std::size_t key = rng.below(pair.m);
    const std::size_t value = rng.below(n);
    store.overwrite(key, value);
    rates.push_back(retrieval_rate(store, config.grading));
  }
  return rates;
}

}  // namespace

ExperimentReport run_mutable(const ExperimentConfig& config, const ProgressLog& log) {
  config.validate();
  ExperimentReport report{config, environment_stamp(), {}, {}, {}, {}};

  for (CleanupStrategy strategy : config.strategies) {
    const std::string name(to_string(strategy));
    for (const MemoryPair& pair : config.pairs) {
      const std::size_t n = std::size_t{1} << pair.k;
      std::vector<std::vector<double>> series(config.trials);
      parallel_for(config.trials, config.threads, [&](std::size_t t) {
        series[t] = mutable_trial(config, strategy, pair, static_cast<unsigned>(t));
      });
      for (unsigned t = 0; t < config.trials; ++t) {
        for (unsigned step = 0; step < series[t].size(); ++step) {
          report.mutable_records.push_back(
              MutableRecord{name, pair.m, n, t, step, series[t][step]});
        }
      }
      note(log, "mutable " + name + " M=" + std::to_string(pair.m) + " N=" + std::to_string(n) +
                    " done");
    }
  }

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& [key, means] : step_means(report.mutable_records)) {
    double total = 0.0;
    for (double v : means) total += v;
    cells.push_back({{"strategy", std::get<0>(key)},
                     {"M", std::get<1>(key)},
                     {"N", std::get<2>(key)},
                     {"step_means", means},
                     {"mean_over_steps", total / static_cast<double>(means.size())}});
  }
  report.summary["cells"] = cells;
  report.summary["grading"] = to_string(config.grading);
  report.summary["step_zero"] = "retrieval rate after the initial writes, before any overwrite";
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressLog& log) {
  switch (config.experiment) {
    case ExperimentKind::timing: return run_timing(config, log);
    case ExperimentKind::capacity: return run_capacity(config, log);
    case ExperimentKind::mutable_memory: return run_mutable(config, log);
  }
  throw ValidationError("unknown experiment");
}

// ---------------------------------------------------------------- aggregates

std::map<unsigned, double> median_seconds(const std::vector<TimingRecord>& records,
                                          std::string_view method) {
  std::map<unsigned, std::vector<double>> samples;
  for (const auto& r : records) {
    if (r.method == method && r.seconds) samples[r.k].push_back(*r.seconds);
  }
  std::map<unsigned, double> out;
  for (auto& [k, v] : samples) out[k] = median(std::move(v));
  return out;
}

double loglog_slope(const std::map<unsigned, double>& median_by_k, unsigned k_lo, unsigned k_hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (unsigned k = k_lo; k <= k_hi; ++k) {
    const auto it = median_by_k.find(k);
    if (it == median_by_k.end()) throw std::invalid_argument("loglog_slope: missing K");
    xs.push_back(static_cast<double>(k) * std::log(2.0));
    ys.push_back(std::log(it->second));
  }
  if (xs.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::map<CellKey, double> success_rates(const std::vector<CapacityRecord>& records) {
  std::map<CellKey, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : records) {
    auto& c = counts[CellKey{r.family, r.k, r.j}];
    c.first += r.success ? 1 : 0;
    c.second += 1;
  }
  std::map<CellKey, double> out;
  for (const auto& [key, c] : counts) {
    out[key] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

std::map<std::pair<std::string, unsigned>, std::size_t> memory_capacity(
    const std::vector<CapacityRecord>& records) {
  std::map<std::pair<std::string, unsigned>, std::size_t> out;
  for (const auto& [key, rate] : success_rates(records)) {
    auto& best = out[{key.family, key.k}];
    if (rate == 1.0) best = std::max(best, std::size_t{1} << key.j);
  }
  return out;
}

std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> step_means(
    const std::vector<MutableRecord>& records) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>,
           std::vector<std::pair<double, std::size_t>>>
      sums;
  for (const auto& r : records) {
    auto& v = sums[{r.strategy, r.m, r.n}];
    if (v.size() <= r.step) v.resize(r.step + 1);
    v[r.step].first += r.retrieval_rate;
    v[r.step].second += 1;
  }
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> out;
  for (const auto& [key, v] : sums) {
    auto& means = out[key];
    for (const auto& [sum, count] : v) {
      means.push_back(count ? sum / static_cast<double>(count) : 0.0);
    }
  }
  return out;
}

}  // namespace krop
