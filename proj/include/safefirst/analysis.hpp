#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "safefirst/core.hpp"
#include "safefirst/evaluate.hpp"
#include "safefirst/moments.hpp"
#include "safefirst/simulate.hpp"

namespace safefirst {

// ---------------------------------------------------------------------------
// Configuration

struct AnalysisConfig {
  std::string input_path;
  std::string outcome_column;
  std::string treatment_column;
  std::vector<std::string> feature_columns;
  /// Optional column carried verbatim as the unit id; row numbers otherwise.
  std::string id_column;
  int n_bins = 3;
  /// Bin a continuous treatment into quantile levels. When false the
  /// treatment column must already hold labels 0..M-1.
  bool discretize = true;
  std::vector<CriterionKind> criteria = {CriterionKind::Neutral, CriterionKind::LinearRA,
                                         CriterionKind::QuadraticRA, CriterionKind::SafetyFirst};
  double y_star = 0.0;
  std::string family = "normal";
  RegressorConfig regressor;
  std::string output_dir = "safefirst-out";
  std::uint64_t seed = 1;
  double plot_fraction = 0.005;
  double overlap_threshold = 0.01;

  /// Throws ConfigError.
  void validate() const;

  bool operator==(const AnalysisConfig&) const = default;
};

/// Flat key/value JSON. Unknown keys and wrongly typed values are ConfigError.
AnalysisConfig config_from_json(const nlohmann::json& j, AnalysisConfig base = {});
nlohmann::json config_to_json(const AnalysisConfig& config);
AnalysisConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Data ingestion

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, header row, optional double-quoted fields.
/// Errors: IoError, ParseError (ragged rows).
CsvTable read_csv(const std::filesystem::path& path);

/// Quantile levels 0..n_bins-1. Cut points are type-1 empirical quantiles
/// q(b/n_bins), b = 1..n_bins-1; a value equal to a cut point falls in the
/// lower level. Errors: NonFiniteValue, InvalidArgument (n_bins < 2),
/// DegenerateDistribution (fewer distinct values than bins).
std::vector<Action> discretize_treatment(std::span<const double> values, int n_bins);

/// Errors: MissingColumn, ParseError (row and column named), NonFiniteValue,
/// plus everything validate_dataset raises.
Dataset load_csv(const std::filesystem::path& path, const AnalysisConfig& config);

// ---------------------------------------------------------------------------
// Reports

/// Dataset facts printed alongside each report.
struct ReportContext {
  std::size_t training_n = 0;
  std::string target;
  std::vector<std::string> features;
  std::string policy_variable;
  int num_actions = 0;
  std::optional<OverlapDiagnostics> overlap;
  bool propensity_converged = true;

  bool operator==(const ReportContext&) const = default;
};

nlohmann::json criterion_to_json(const RiskCriterion& criterion);
RiskCriterion criterion_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EvaluationReport& report, const ReportContext& context);
EvaluationReport report_from_json(const nlohmann::json& j);
ReportContext context_from_json(const nlohmann::json& j);

/// Plain-text table with the sections "Data Information", "Policy
/// Information", "Frequencies of the actions (training data)", "Training Data
/// Results" and "New Data Results", followed by overlap diagnostics.
std::string render_report_text(const EvaluationReport& report, const ReportContext& context);

nlohmann::json simulation_to_json(const MonteCarloSummary& summary);
std::string render_simulation_text(const MonteCarloSummary& summary);

// ---------------------------------------------------------------------------
// Pipeline

struct AnalysisResult {
  ReportContext context;
  std::vector<CriterionEvaluation> evaluations;
  std::vector<std::filesystem::path> files;
};

/// Loads the data, fits the moment model once, evaluates each requested
/// criterion and writes `<criterion>.report.txt`, `<criterion>.report.json`,
/// `<criterion>.plotdata.csv` and `<criterion>.plotdata.sample.csv` into the
/// output directory. Files written before a failure are removed.
AnalysisResult run_analysis(const AnalysisConfig& config);

/// Columns: unit_id, actual_action, optimal_action, actual_expected_score,
/// optimal_expected_score. The sampled variant keeps round(fraction * n)
/// rows chosen with a generator seeded by `seed`, in original row order.
/// Returns the files written.
std::vector<std::filesystem::path> export_plot_data(const CriterionEvaluation& evaluation,
                                                    const MomentTable& table,
                                                    std::span<const std::string> unit_ids,
                                                    const std::filesystem::path& output_dir,
                                                    double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic data

/// Farm-like cross-section with a heteroskedastic outcome.
///
/// Covariates: labor (LU/ha) = 0.095 (1 + 0.3 u) with u ~ N(0,1) clipped to
/// [-3, 3]; fixed_costs and variable_costs lognormal; subsidy_pillar2 and
/// subsidy_national Bernoulli(0.355) and Bernoulli(0.027). The continuous
/// treatment subsidy_per_ha = exp(0.3 + 0.5 u + 0.4 pillar2 + 0.5 e) is
/// rounded to `tie_granularity`, producing ties, and its quantile level t
/// drives the outcome
///   net_output = mu_t(u) + sigma_t(u) * eps,
///   mu_t(u) = base_t + slope_t u,  sigma_t(u) = scale_t sqrt(1 + 0.25 u^2).
/// Both E[Y|x] and E[Y^2|x] are quadratic in labor, so the default basis can
/// represent them exactly.
struct SyntheticSpec {
  std::size_t n = 5000;
  double tie_granularity = 0.1;
  std::vector<double> base = {1.2, 1.6, 2.0};
  std::vector<double> slope = {0.3, 0.5, 0.9};
  std::vector<double> scale = {0.8, 2.0, 4.0};

  /// Number of treatment levels, i.e. base.size(). Throws InvalidArgument if
  /// the three vectors disagree or n is too small.
  int levels() const;
};

struct SyntheticData {
  CsvTable table;
  /// Ground-truth moments, row-major n x levels.
  std::vector<double> true_mu;
  std::vector<double> true_sigma;
  std::vector<Action> levels;
};

SyntheticData generate_synthetic_data(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes the CSV and `<stem>.truth.csv` next to it. Returns both paths.
std::vector<std::filesystem::path> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                                      const std::filesystem::path& csv_path);

/// Config that analyses a file produced by generate_synthetic.
AnalysisConfig synthetic_analysis_config(const std::filesystem::path& csv_path,
                                         const std::filesystem::path& output_dir);

/// Shortest round-trip decimal form, used for every number written to CSV.
std::string format_number(double value);

}  // namespace safefirst
