#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "krop/experiments.hpp"

#ifndef KROP_BUILD_ID
#define KROP_BUILD_ID "unknown"
#endif

namespace krop {

nlohmann::ordered_json environment_stamp() {
  char host[256] = {};
  if (gethostname(host, sizeof(host) - 1) != 0) host[0] = '\0';
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char date[32];
  std::strftime(date, sizeof(date), "%Y-%m-%dT%H:%M:%SZ", &utc);

  nlohmann::ordered_json env;
  env["host"] = host;
  env["date"] = date;
  env["build_id"] = KROP_BUILD_ID;
  env["compiler"] = __VERSION__;
  env["rng"] = SeededRng::kAlgorithm;
  return env;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::vector<std::string> names_of(const std::vector<T>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) out.emplace_back(to_string(item));
  return out;
}

}  // namespace

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(c.experiment);
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  j["j_min"] = c.j_min;
  if (c.j_max) {
    j["j_max"] = *c.j_max;
  } else {
    j["j_max"] = nullptr;
  }
  j["trials"] = c.trials;
  j["reps"] = c.reps;
  j["warmup"] = c.warmup;
  j["steps"] = c.steps;
  j["theta_scheme"] = to_string(c.theta_scheme);
  j["seed"] = c.seed;
  j["families"] = names_of(c.families);
  j["strategies"] = names_of(c.strategies);
  j["direct_k_max"] = c.direct_k_max;
  j["baseline_k_max"] = c.baseline_k_max;
  j["prune"] = c.prune;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& p : c.pairs) pairs.push_back({{"M", p.m}, {"K", p.k}});
  j["pairs"] = pairs;
  j["grading"] = to_string(c.grading);
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  j["format"] = c.format;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::ordered_json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment_kind(j["experiment"].get<std::string>());
    if (j.contains("k_min")) c.k_min = j["k_min"].get<unsigned>();
    if (j.contains("k_max")) c.k_max = j["k_max"].get<unsigned>();
    if (j.contains("j_min")) c.j_min = j["j_min"].get<unsigned>();
    if (j.contains("j_max")) {
      c.j_max = j["j_max"].is_null() ? std::nullopt : std::optional(j["j_max"].get<unsigned>());
    }
    if (j.contains("trials")) c.trials = j["trials"].get<unsigned>();
    if (j.contains("reps")) c.reps = j["reps"].get<unsigned>();
    if (j.contains("warmup")) c.warmup = j["warmup"].get<unsigned>();
    if (j.contains("steps")) c.steps = j["steps"].get<unsigned>();
    if (j.contains("theta_scheme")) c.theta_scheme = parse_theta_scheme(j["theta_scheme"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("families")) {
      c.families.clear();
      for (const auto& f : j["families"]) c.families.push_back(parse_codebook_family(f.get<std::string>()));
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j["strategies"]) c.strategies.push_back(parse_cleanup_strategy(s.get<std::string>()));
    }
    if (j.contains("direct_k_max")) c.direct_k_max = j["direct_k_max"].get<unsigned>();
    if (j.contains("baseline_k_max")) c.baseline_k_max = j["baseline_k_max"].get<unsigned>();
    if (j.contains("prune")) c.prune = j["prune"].get<bool>();
    if (j.contains("pairs")) {
      c.pairs.clear();
      for (const auto& p : j["pairs"]) {
        c.pairs.push_back(MemoryPair{p.at("M").get<std::size_t>(), p.at("K").get<unsigned>()});
      }
    }
    if (j.contains("grading")) c.grading = parse_grading(j["grading"].get<std::string>());
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("format")) c.format = j["format"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
  return c;
}

std::string timing_csv(const std::vector<TimingRecord>& records) {
  std::ostringstream out;
  out << "experiment,K,N,rep,method,seconds,index_agreement\n";
  for (const auto& r : records) {
    out << "timing," << r.k << ',' << r.n << ',' << r.rep << ',' << r.method << ','
        << (r.seconds ? format_double(*r.seconds) : std::string()) << ',' << r.index_agreement
        << '\n';
  }
  return out.str();
}

std::string capacity_csv(const std::vector<CapacityRecord>& records) {
  std::ostringstream out;
  out << "experiment,family,K,N,J,M,trial,retrieval_rate,success\n";
  for (const auto& r : records) {
    out << "capacity," << r.family << ',' << r.k << ',' << r.n << ',' << r.j << ',' << r.m << ','
        << r.trial << ',' << format_double(r.retrieval_rate) << ',' << (r.success ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string mutable_csv(const std::vector<MutableRecord>& records) {
  std::ostringstream out;
  out << "experiment,strategy,M,N,trial,step,retrieval_rate\n";
  for (const auto& r : records) {
    out << "mutable," << r.strategy << ',' << r.m << ',' << r.n << ',' << r.trial << ',' << r.step
        << ',' << format_double(r.retrieval_rate) << '\n';
  }
  return out.str();
}

std::string report_csv(const ExperimentReport& report) {
  switch (report.config.experiment) {
    case ExperimentKind::timing: return timing_csv(report.timing);
    case ExperimentKind::capacity: return capacity_csv(report.capacity);
    case ExperimentKind::mutable_memory: return mutable_csv(report.mutable_records);
  }
  return {};
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(report.config);
  j["environment"] = report.environment;
  auto& records = j["records"];
  records = nlohmann::ordered_json::array();
  switch (report.config.experiment) {
    case ExperimentKind::timing:
      for (const auto& r : report.timing) {
        nlohmann::ordered_json o{{"experiment", "timing"}, {"K", r.k}, {"N", r.n}, {"rep", r.rep},
                                 {"method", r.method}};
        o["seconds"] = r.seconds ? nlohmann::ordered_json(*r.seconds) : nlohmann::ordered_json();
        o["index_agreement"] = r.index_agreement;
        records.push_back(o);
      }
      break;
    case ExperimentKind::capacity:
      for (const auto& r : report.capacity) {
        records.push_back({{"experiment", "capacity"}, {"family", r.family}, {"K", r.k},
                           {"N", r.n}, {"J", r.j}, {"M", r.m}, {"trial", r.trial},
                           {"retrieval_rate", r.retrieval_rate}, {"success", r.success}});
      }
      break;
    case ExperimentKind::mutable_memory:
      for (const auto& r : report.mutable_records) {
        records.push_back({{"experiment", "mutable"}, {"strategy", r.strategy}, {"M", r.m},
                           {"N", r.n}, {"trial", r.trial}, {"step", r.step},
                           {"retrieval_rate", r.retrieval_rate}});
      }
      break;
  }
  j["summary"] = report.summary;
  return j;
}

ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
  ExperimentReport report;
  try {
    report.config = config_from_json(j.at("config"), ExperimentConfig{});
    report.environment = j.value("environment", nlohmann::ordered_json::object());
    report.summary = j.value("summary", nlohmann::ordered_json::object());
    for (const auto& r : j.at("records")) {
      switch (report.config.experiment) {
        case ExperimentKind::timing: {
          TimingRecord t{r.at("K").get<unsigned>(), r.at("N").get<std::size_t>(),
                         r.at("rep").get<unsigned>(), r.at("method").get<std::string>(),
                         std::nullopt, r.at("index_agreement").get<std::string>()};
          if (!r.at("seconds").is_null()) t.seconds = r["seconds"].get<double>();
          report.timing.push_back(std::move(t));
          break;
        }
        case ExperimentKind::capacity:
          report.capacity.push_back(CapacityRecord{
              r.at("family").get<std::string>(), r.at("K").get<unsigned>(),
              r.at("N").get<std::size_t>(), r.at("J").get<unsigned>(),
              r.at("M").get<std::size_t>(), r.at("trial").get<unsigned>(),
              r.at("retrieval_rate").get<double>(), r.at("success").get<bool>()});
          break;
        case ExperimentKind::mutable_memory:
          report.mutable_records.push_back(MutableRecord{
              r.at("strategy").get<std::string>(), r.at("M").get<std::size_t>(),
              r.at("N").get<std::size_t>(), r.at("trial").get<unsigned>(),
              r.at("step").get<unsigned>(), r.at("retrieval_rate").get<double>()});
          break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                std::string_view format,
                                                const std::filesystem::path& dir) {
  if (format != "csv" && format != "json" && format != "both") {
    throw ValidationError("format must be csv, json or both");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const std::string stem(to_string(report.config.experiment));
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
    written.push_back(path);
  };
  if (format != "json") emit(dir / (stem + ".csv"), report_csv(report));
  if (format != "csv") emit(dir / (stem + ".json"), report_to_json(report).dump(2) + "\n");
  return written;
}

ExperimentReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return report_from_json(j);
}

}  // namespace krop
