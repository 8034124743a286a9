#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "safefirst/analysis.hpp"
#include "safefirst/simulate.hpp"

using namespace safefirst;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return kExitConfig;
    case ErrorCode::SingularDesign:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

json read_json(const fs::path& path, ErrorCode on_failure) {
  std::ifstream in(path);
  if (!in) throw Error(on_failure, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(on_failure, path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<CriterionKind> parse_criteria(const std::vector<std::string>& names) {
  std::vector<CriterionKind> out;
  for (const auto& n : names) {
    try {
      out.push_back(criterion_kind_from_string(n));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;
  std::optional<std::string> outcome;
  std::optional<std::string> treatment;
  std::vector<std::string> features;
  std::vector<std::string> criteria;
  std::optional<double> y_star;
  std::optional<std::string> family;
  std::optional<std::string> regressor;
  std::optional<std::size_t> knn_k;
  std::optional<double> plot_fraction;
};

int run_fit(const FitOptions& o) {
  AnalysisConfig config;
  if (!o.config.empty()) config = load_config(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  if (o.input) config.input_path = *o.input;
  if (o.outcome) config.outcome_column = *o.outcome;
  if (o.treatment) config.treatment_column = *o.treatment;
  if (!o.features.empty()) config.feature_columns = o.features;
  if (!o.criteria.empty()) config.criteria = parse_criteria(o.criteria);
  if (o.y_star) config.y_star = *o.y_star;
  if (o.family) config.family = *o.family;
  if (o.regressor) {
    json j = config_to_json(config);
    j["regressor"] = *o.regressor;
    config = config_from_json(j);
  }
  if (o.knn_k) config.regressor.knn_k = *o.knn_k;
  if (o.plot_fraction) config.plot_fraction = *o.plot_fraction;

  const auto result = run_analysis(config);
  std::printf("%-14s %12s %12s %10s %8s\n", "criterion", "actual", "optimal", "regret", "match");
  for (const auto& ev : result.evaluations) {
    const auto& r = ev.report;
    std::printf("%-14s %12.4f %12.4f %10.4f %8.2f\n", std::string(to_string(r.criterion.kind())).c_str(),
                r.value_actual, r.value_optimal, r.regret_vs_first_best, r.match_rate);
  }
  for (const auto& f : result.files) std::printf("wrote %s\n", f.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> n;
  std::optional<double> mu0, mu1, sigma0, sigma1;
};

int run_simulate(const SimulateOptions& o) {
  TwoArmParams p;
  std::size_t reps = 2000;
  if (!o.config.empty()) {
    const auto j = read_json(o.config, ErrorCode::ConfigError);
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "simulation config must be a JSON object");
    try {
      for (const auto& [key, value] : j.items()) {
        if (key == "mu0") p.mu0 = value.get<double>();
        else if (key == "mu1") p.mu1 = value.get<double>();
        else if (key == "sigma0") p.sigma0 = value.get<double>();
        else if (key == "sigma1") p.sigma1 = value.get<double>();
        else if (key == "n") p.n = value.get<std::size_t>();
        else if (key == "reps") reps = value.get<std::size_t>();
        else if (key == "seed") p.seed = value.get<std::uint64_t>();
        else throw Error(ErrorCode::ConfigError, "unknown simulation key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("simulation config: ") + e.what());
    }
  }
  if (o.seed) p.seed = *o.seed;
  if (o.reps) reps = *o.reps;
  if (o.n) p.n = *o.n;
  if (o.mu0) p.mu0 = *o.mu0;
  if (o.mu1) p.mu1 = *o.mu1;
  if (o.sigma0) p.sigma0 = *o.sigma0;
  if (o.sigma1) p.sigma1 = *o.sigma1;
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (reps == 0) throw Error(ErrorCode::ConfigError, "reps must be at least 1");

  const auto summary = run_simulation(p, reps);
  const auto text = render_simulation_text(summary);
  std::fputs(text.c_str(), stdout);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / "simulation.report.txt", text);
    write_text(dir / "simulation.report.json", simulation_to_json(summary).dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportOptions {
  std::string config;
  std::vector<std::string> inputs;
  std::string out;
};

int run_report(const ReportOptions& o) {
  std::vector<fs::path> inputs(o.inputs.begin(), o.inputs.end());
  if (inputs.empty()) {
    if (o.config.empty()) throw Error(ErrorCode::ConfigError, "report needs JSON files or --config");
    const fs::path dir(load_config(o.config).output_dir);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "no output directory " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.ends_with(".report.json") && name != "simulation.report.json") inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw Error(ErrorCode::IoError, "no report JSON files in " + dir.string());
  }
  for (const auto& path : inputs) {
    const auto j = read_json(path, ErrorCode::ParseError);
    const auto text = render_report_text(report_from_json(j), context_from_json(j));
    if (o.out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      auto name = path.filename();
      name.replace_extension(".txt");
      write_text(fs::path(o.out) / name, text);
      std::printf("wrote %s\n", (fs::path(o.out) / name).string().c_str());
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "synthetic.csv";
  std::optional<std::size_t> n;
  std::optional<double> tie_granularity;
};

int run_synth(const SynthOptions& o) {
  SyntheticSpec spec;
  std::uint64_t seed = 20251019;
  if (!o.config.empty()) {
    const auto j = read_json(o.config, ErrorCode::ConfigError);
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "synthetic config must be a JSON object");
    try {
      for (const auto& [key, value] : j.items()) {
        if (key == "n") spec.n = value.get<std::size_t>();
        else if (key == "tie_granularity") spec.tie_granularity = value.get<double>();
        else if (key == "base") spec.base = value.get<std::vector<double>>();
        else if (key == "slope") spec.slope = value.get<std::vector<double>>();
        else if (key == "scale") spec.scale = value.get<std::vector<double>>();
        else if (key == "seed") seed = value.get<std::uint64_t>();
        else throw Error(ErrorCode::ConfigError, "unknown synthetic key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("synthetic config: ") + e.what());
    }
  }
  if (o.seed) seed = *o.seed;
  if (o.n) spec.n = *o.n;
  if (o.tie_granularity) spec.tie_granularity = *o.tie_granularity;
  try {
    spec.levels();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }

  const fs::path csv(o.out);
  for (const auto& f : generate_synthetic(spec, seed, csv)) std::printf("wrote %s\n", f.string().c_str());
  // A ready-to-use analysis config next to the data.
  auto config_path = csv;
  config_path.replace_extension(".config.json");
  auto out_dir = csv.parent_path() / (csv.stem().string() + "-out");
  auto config = synthetic_analysis_config(csv, out_dir);
  config.seed = seed;
  write_text(config_path, config_to_json(config).dump(2) + "\n");
  std::printf("wrote %s\n", config_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive treatment assignment with conditional mean and variance estimates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "safefirst 1.0.0");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit moments, assign policies and write reports");
  fit_cmd->add_option("--config", fit.config, "Analysis config (JSON)")->check(CLI::ExistingFile);
  fit_cmd->add_option("--seed", fit.seed, "Seed for plot-data sampling");
  fit_cmd->add_option("--out", fit.out, "Output directory");
  fit_cmd->add_option("--input", fit.input, "Input CSV");
  fit_cmd->add_option("--outcome", fit.outcome, "Outcome column");
  fit_cmd->add_option("--treatment", fit.treatment, "Treatment column");
  fit_cmd->add_option("--features", fit.features, "Feature columns")->delimiter(',');
  fit_cmd->add_option("--criteria", fit.criteria, "neutral,linear,quadratic,safety_first")->delimiter(',');
  fit_cmd->add_option("--y-star", fit.y_star, "Safety-first threshold");
  fit_cmd->add_option("--family", fit.family, "normal | logistic");
  fit_cmd->add_option("--regressor", fit.regressor, "least_squares | knn");
  fit_cmd->add_option("--knn-k", fit.knn_k, "Neighbours for knn");
  fit_cmd->add_option("--plot-fraction", fit.plot_fraction, "Share of rows in the sampled plot data");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Two-arm Monte Carlo experiment");
  sim_cmd->add_option("--config", sim.config, "Simulation parameters (JSON)")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--out", sim.out, "Directory for simulation.report.{txt,json}");
  sim_cmd->add_option("--reps", sim.reps, "Replications (default 2000)");
  sim_cmd->add_option("--n", sim.n, "Units per replication");
  sim_cmd->add_option("--mu0", sim.mu0);
  sim_cmd->add_option("--mu1", sim.mu1);
  sim_cmd->add_option("--sigma0", sim.sigma0);
  sim_cmd->add_option("--sigma1", sim.sigma1);

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Render text reports from their JSON twins");
  rep_cmd->add_option("files", rep.inputs, "Report JSON files")->check(CLI::ExistingFile);
  rep_cmd->add_option("--config", rep.config, "Analysis config; renders every report in its output_dir")
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("--out", rep.out, "Write <name>.txt files here instead of stdout");
  std::uint64_t unused_seed = 0;
  rep_cmd->add_option("--seed", unused_seed, "Accepted for symmetry; rendering is deterministic");

  SynthOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Write a synthetic farm dataset with ground truth");
  syn_cmd->add_option("--config", syn.config, "Generator parameters (JSON)")->check(CLI::ExistingFile);
  syn_cmd->add_option("--seed", syn.seed, "Generator seed");
  syn_cmd->add_option("--out", syn.out, "CSV path");
  syn_cmd->add_option("--n", syn.n, "Units");
  syn_cmd->add_option("--tie-granularity", syn.tie_granularity, "Rounding step of the treatment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
    if (*rep_cmd) return run_report(rep);
    if (*syn_cmd) return run_synth(syn);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "error: out of memory\n");
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
