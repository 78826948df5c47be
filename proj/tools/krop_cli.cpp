#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "krop/cleanup.hpp"
#include "krop/codebook.hpp"
#include "krop/experiments.hpp"
#include "krop/hypervector.hpp"
#include "krop/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

// Raised for problems the caller can fix: bad flag values, bad files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw UsageError("empty list: '" + text + "'");
  return out;
}

unsigned parse_unsigned(std::string_view text, std::string_view what) {
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError(std::string(what) + ": not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError(std::string(what) + ": not a 64-bit unsigned integer: '" + std::string(text) + "'");
  }
  return value;
}

// "lo..hi" or a single "K".
std::pair<unsigned, unsigned> parse_k_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const unsigned k = parse_unsigned(text, "--k");
    return {k, k};
  }
  return {parse_unsigned(std::string_view(text).substr(0, dots), "--k"),
          parse_unsigned(std::string_view(text).substr(dots + 2), "--k")};
}

// "M:K,M:K,..."
std::vector<krop::MemoryPair> parse_pairs(const std::string& text) {
  std::vector<krop::MemoryPair> pairs;
  for (const auto& item : split_csv(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--pairs expects M:K items, got '" + item + "'");
    pairs.push_back({parse_unsigned(std::string_view(item).substr(0, colon), "--pairs"),
                     parse_unsigned(std::string_view(item).substr(colon + 1), "--pairs")});
  }
  return pairs;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open vector file '" + path + "'");
  std::vector<double> values;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    values.push_back(v);
  }
  return values;
}

void write_vector(const krop::HyperVector& v, const std::string& path) {
  std::ostringstream body;
  for (double x : v.values()) body << format_double(x) << '\n';
  if (path.empty() || path == "-") {
    std::cout << body.str();
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << body.str())) throw UsageError("cannot write '" + path + "'");
}

krop::KropParams read_params(const std::string& path) {
  try {
    return krop::load_params(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// Creates the output directory and checks it accepts files.
void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw UsageError("cannot create output directory '" + dir + "'");
  }
  const auto probe = std::filesystem::path(dir) / ".krop-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw UsageError("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

struct ExperimentFlags {
  krop::ExperimentKind kind = krop::ExperimentKind::timing;
  std::string config_path;
  std::string out;
  std::string k_range;
  unsigned k_max = 0;
  unsigned j_min = 0;
  unsigned j_max = 0;
  unsigned reps = 0;
  unsigned warmup = 0;
  unsigned trials = 0;
  unsigned steps = 0;
  unsigned direct_k_max = 0;
  unsigned baseline_k_max = 0;
  std::string families;
  std::string strategies;
  std::string pairs;
  std::string theta_scheme;
  std::string grading;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string format;
  bool no_prune = false;
  CLI::App* app = nullptr;
};

void add_common_flags(CLI::App* sub, ExperimentFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override its values");
  sub->add_option("--out", f.out, "Output directory for the report files");
  sub->add_option("--seed", f.seed, "Master seed (falls back to config, then KROP_SEED, then 0)");
  sub->add_option("--k", f.k_range, "K range as lo..hi, or a single K");
  sub->add_option("--k-max", f.k_max, "Upper K bound (lower bound keeps its default)");
  sub->add_option("--theta-scheme", f.theta_scheme, "Angle scheme for krop codebooks")
      ->check(CLI::IsMember({"evenly-spaced", "uniform-random"}));
  sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "json", "both"}));
}

CLI::App* add_timing(CLI::App& app, ExperimentFlags& f) {
  auto* sub = app.add_subcommand("timing", "Clean-up wall time, krop vs dense direct, per K");
  add_common_flags(sub, f);
  sub->add_option("--reps", f.reps, "Timed repetitions per (K, method)");
  sub->add_option("--warmup", f.warmup, "Untimed warm-up repetitions per (K, method)");
  sub->add_option("--direct-k-max", f.direct_k_max, "Largest K for the dense baseline");
  return sub;
}

CLI::App* add_capacity(CLI::App& app, ExperimentFlags& f) {
  auto* sub = app.add_subcommand("capacity", "Memory capacity per codebook family and K");
  add_common_flags(sub, f);
  sub->add_option("--trials", f.trials, "Trials per (family, K, J) cell");
  sub->add_option("--families", f.families, "Comma list of normal,binary,sylvester,krop");
  sub->add_option("--j-min", f.j_min, "Smallest J, with M = 2^J");
  sub->add_option("--j-max", f.j_max, "Largest J (default K-2)");
  sub->add_option("--baseline-k-max", f.baseline_k_max, "Largest K for normal and binary families");
  sub->add_flag("--no-prune", f.no_prune, "Keep raising J after a cell with zero successes");
  return sub;
}

CLI::App* add_mutable(CLI::App& app, ExperimentFlags& f) {
  auto* sub = app.add_subcommand("mutable", "Retrieval rate under repeated overwrites");
  add_common_flags(sub, f);
  sub->add_option("--trials", f.trials, "Trials per (strategy, M, N)");
  sub->add_option("--steps", f.steps, "Overwrite steps per trial");
  sub->add_option("--strategies", f.strategies, "Comma list of krop,sign,none,direct");
  sub->add_option("--pairs", f.pairs, "Comma list of M:K cells, N = 2^K");
  sub->add_option("--grading", f.grading, "How a read counts as correct")
      ->check(CLI::IsMember({"by-strategy", "codebook-argmax"}));
  return sub;
}

bool given(const CLI::App* app, const std::string& name) { return app->count(name) > 0; }

krop::ExperimentConfig effective_config(const ExperimentFlags& f) {
  auto config = krop::default_config(f.kind);
  bool seed_from_config = false;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw UsageError("cannot open config '" + f.config_path + "'");
    nlohmann::ordered_json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config '" + f.config_path + "': " + e.what());
    }
    if (j.contains("experiment") && j["experiment"] != std::string(krop::to_string(f.kind))) {
      throw UsageError("config is for experiment " + j["experiment"].dump() + ", not " +
                       std::string(krop::to_string(f.kind)));
    }
    config = krop::config_from_json(j, config);
    seed_from_config = j.contains("seed");
  }

  const auto* a = f.app;
  if (given(a, "--seed")) {
    config.seed = f.seed;
  } else if (!seed_from_config) {
    if (const char* env = std::getenv("KROP_SEED"); env != nullptr && *env != '\0') {
      config.seed = parse_u64(env, "KROP_SEED");
    }
  }
  if (given(a, "--out")) config.out_dir = f.out;
  if (given(a, "--k")) std::tie(config.k_min, config.k_max) = parse_k_range(f.k_range);
  if (given(a, "--k-max")) {
    if (given(a, "--k")) throw UsageError("--k and --k-max are mutually exclusive");
    config.k_max = f.k_max;
  }
  if (given(a, "--theta-scheme")) config.theta_scheme = krop::parse_theta_scheme(f.theta_scheme);
  if (given(a, "--threads")) config.threads = f.threads;
  if (given(a, "--format")) config.format = f.format;
  if (a->get_option_no_throw("--reps") && given(a, "--reps")) config.reps = f.reps;
  if (a->get_option_no_throw("--warmup") && given(a, "--warmup")) config.warmup = f.warmup;
  if (a->get_option_no_throw("--direct-k-max") && given(a, "--direct-k-max")) {
    config.direct_k_max = f.direct_k_max;
  }
  if (a->get_option_no_throw("--trials") && given(a, "--trials")) config.trials = f.trials;
  if (a->get_option_no_throw("--steps") && given(a, "--steps")) config.steps = f.steps;
  if (a->get_option_no_throw("--j-min") && given(a, "--j-min")) config.j_min = f.j_min;
  if (a->get_option_no_throw("--j-max") && given(a, "--j-max")) config.j_max = f.j_max;
  if (a->get_option_no_throw("--baseline-k-max") && given(a, "--baseline-k-max")) {
    config.baseline_k_max = f.baseline_k_max;
  }
  if (a->get_option_no_throw("--no-prune") && given(a, "--no-prune")) config.prune = false;
  if (a->get_option_no_throw("--families") && given(a, "--families")) {
    config.families.clear();
    for (const auto& name : split_csv(f.families)) {
      config.families.push_back(krop::parse_codebook_family(name));
    }
  }
  if (a->get_option_no_throw("--strategies") && given(a, "--strategies")) {
    config.strategies.clear();
    for (const auto& name : split_csv(f.strategies)) {
      config.strategies.push_back(krop::parse_cleanup_strategy(name));
    }
  }
  if (a->get_option_no_throw("--pairs") && given(a, "--pairs")) config.pairs = parse_pairs(f.pairs);
  if (a->get_option_no_throw("--grading") && given(a, "--grading")) {
    config.grading = krop::parse_grading(f.grading);
  }
  config.validate();
  return config;
}

int run_experiment_command(const ExperimentFlags& f) {
  const auto config = effective_config(f);
  if (config.out_dir.empty()) {
    std::cerr << "error: --out is required (no out_dir in config)\n\n" << f.app->help();
    return kExitUsage;
  }
  prepare_out_dir(config.out_dir);
  std::cout << "effective config: " << krop::config_to_json(config).dump() << std::endl;

  const auto report = krop::run_experiment(config, [](const std::string& line) {
    std::cerr << line << '\n';
  });
  for (const auto& path : krop::write_report(report, config.format, config.out_dir)) {
    std::cout << "wrote " << path.string() << '\n';
  }
  if (!report.summary.empty()) std::cout << "summary: " << report.summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krop: HRR memory with the krop codebook and its fast clean-up"};
  app.require_subcommand(1);

  ExperimentFlags timing;
  ExperimentFlags capacity;
  ExperimentFlags mutable_flags;
  capacity.kind = krop::ExperimentKind::capacity;
  mutable_flags.kind = krop::ExperimentKind::mutable_memory;
  timing.app = add_timing(app, timing);
  capacity.app = add_capacity(app, capacity);
  mutable_flags.app = add_mutable(app, mutable_flags);

  std::string params_path;
  std::string input_path;
  std::string emit_row;
  auto* cleanup = app.add_subcommand("cleanup", "Clean up a noisy vector against a krop codebook");
  cleanup->add_option("--params", params_path, "krop parameter file (JSON)")->required();
  cleanup->add_option("--input", input_path, "Vector file, one value per line")->required();
  cleanup->add_option("--emit-row", emit_row, "Also write the winning codebook row to this file");

  std::uint64_t row_index = 0;
  std::string row_out;
  auto* row = app.add_subcommand("row", "Reconstruct one krop codebook row");
  row->add_option("--params", params_path, "krop parameter file (JSON)")->required();
  row->add_option("--index", row_index, "Row index in [0, 2^K)")->required();
  row->add_option("--out", row_out, "Output vector file (stdout when omitted)");

  unsigned params_k = 0;
  std::string params_scheme = "evenly-spaced";
  std::uint64_t params_seed = 0;
  std::string params_out;
  auto* params = app.add_subcommand("params", "Generate a krop parameter file");
  params->add_option("--k", params_k, "Number of factors K, N = 2^K")->required();
  params->add_option("--theta-scheme", params_scheme, "Angle scheme")
      ->check(CLI::IsMember({"evenly-spaced", "uniform-random"}));
  params->add_option("--seed", params_seed, "Seed for uniform-random angles (falls back to KROP_SEED)");
  params->add_option("--out", params_out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*timing.app) return run_experiment_command(timing);
    if (*capacity.app) return run_experiment_command(capacity);
    if (*mutable_flags.app) return run_experiment_command(mutable_flags);

    if (*params) {
      if (params->count("--seed") == 0) {
        if (const char* env = std::getenv("KROP_SEED"); env != nullptr && *env != '\0') {
          params_seed = parse_u64(env, "KROP_SEED");
        }
      }
      const auto scheme = krop::parse_theta_scheme(params_scheme);
      krop::SeededRng rng(params_seed);
      const auto p = krop::krop_params(params_k, scheme, &rng);
      if (params_out.empty()) {
        std::cout << krop::params_to_json(p) << '\n';
      } else {
        krop::save_params(p, params_out);
      }
      return kExitOk;
    }

    if (*row) {
      const auto p = read_params(params_path);
      if (row_index >= p.dim()) {
        throw UsageError("--index " + std::to_string(row_index) + " out of range [0, " +
                         std::to_string(p.dim()) + ")");
      }
      write_vector(krop::krop_row(p, row_index), row_out);
      return kExitOk;
    }

    if (*cleanup) {
      const auto p = read_params(params_path);
      auto values = read_vector_file(input_path);
      if (values.size() != p.dim()) {
        throw UsageError("input has " + std::to_string(values.size()) + " values, codebook needs " +
                         std::to_string(p.dim()));
      }
      const auto result = krop::krop_cleanup(p, krop::HyperVector(std::move(values)));
      std::cout << *result.index << ' ' << format_double(*result.top_score) << '\n';
      if (!emit_row.empty()) write_vector(result.vector, emit_row);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    // ValidationError and DimensionError: bad user-supplied values.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const krop::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
