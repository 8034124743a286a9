#include <algorithm>
#include <cmath>
#include <fstream>

#include "safefirst/analysis.hpp"
#include "safefirst/rng.hpp"

namespace safefirst {

int SyntheticSpec::levels() const {
  if (base.size() < 2 || slope.size() != base.size() || scale.size() != base.size()) {
    throw Error(ErrorCode::InvalidArgument, "synthetic parameters need matching base/slope/scale of size >= 2");
  }
  for (double s : scale) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "synthetic scales must be positive");
  }
  if (n < 10 * base.size()) throw Error(ErrorCode::InvalidArgument, "synthetic n is too small");
  if (!(tie_granularity > 0.0)) throw Error(ErrorCode::InvalidArgument, "tie_granularity must be positive");
  return static_cast<int>(base.size());
}

SyntheticData generate_synthetic_data(const SyntheticSpec& spec, std::uint64_t seed) {
  const int levels = spec.levels();
  const auto L = static_cast<std::size_t>(levels);
  Xoshiro256 rng(seed);

  SyntheticData out;
  out.table.header = {"unit_id",        "net_output",      "subsidy_per_ha",  "labor",
                      "fixed_costs",    "variable_costs",  "subsidy_pillar2", "subsidy_national"};
  std::vector<double> u(spec.n);
  std::vector<double> subsidy(spec.n);
  std::vector<std::vector<double>> covariates(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    u[i] = std::clamp(rng.normal(), -3.0, 3.0);
    const double labor = 0.095 * (1.0 + 0.3 * u[i]);
    const double fixed = std::exp(-0.5 + 0.6 * rng.normal());
    const double variable = std::exp(0.5 * rng.normal());
    const double pillar2 = rng.uniform_open() < 0.355 ? 1.0 : 0.0;
    const double national = rng.uniform_open() < 0.027 ? 1.0 : 0.0;
    const double raw = std::exp(0.3 + 0.5 * u[i] + 0.4 * pillar2 + 0.5 * rng.normal());
    subsidy[i] = std::round(raw / spec.tie_granularity) * spec.tie_granularity;
    covariates[i] = {labor, fixed, variable, pillar2, national};
  }
  out.levels = discretize_treatment(subsidy, levels);

  out.true_mu.resize(spec.n * L);
  out.true_sigma.resize(spec.n * L);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double spread = std::sqrt(1.0 + 0.25 * u[i] * u[i]);
    for (std::size_t t = 0; t < L; ++t) {
      out.true_mu[i * L + t] = spec.base[t] + spec.slope[t] * u[i];
      out.true_sigma[i * L + t] = spec.scale[t] * spread;
    }
    const auto t = static_cast<std::size_t>(out.levels[i]);
    const double y = out.true_mu[i * L + t] + out.true_sigma[i * L + t] * rng.normal();

    char id[32];
    std::snprintf(id, sizeof(id), "F%06zu", i + 1);
    std::vector<std::string> row{id, format_number(y), format_number(subsidy[i])};
    for (double v : covariates[i]) row.push_back(format_number(v));
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

std::string to_csv(const CsvTable& table) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) line += ',';
      line += cells[i];
    }
    return line + "\n";
  };
  std::string out = join(table.header);
  for (const auto& row : table.rows) out += join(row);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                                      const std::filesystem::path& csv_path) {
  const auto data = generate_synthetic_data(spec, seed);
  const auto L = static_cast<std::size_t>(spec.levels());

  CsvTable truth;
  truth.header = {"unit_id", "level"};
  for (std::size_t t = 0; t < L; ++t) truth.header.push_back("mu_" + std::to_string(t));
  for (std::size_t t = 0; t < L; ++t) truth.header.push_back("sigma_" + std::to_string(t));
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<std::string> row{data.table.rows[i][0], std::to_string(data.levels[i])};
    for (std::size_t t = 0; t < L; ++t) row.push_back(format_number(data.true_mu[i * L + t]));
    for (std::size_t t = 0; t < L; ++t) row.push_back(format_number(data.true_sigma[i * L + t]));
    truth.rows.push_back(std::move(row));
  }

  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  auto truth_path = csv_path;
  truth_path.replace_extension(".truth.csv");
  write_text(csv_path, to_csv(data.table));
  write_text(truth_path, to_csv(truth));
  return {csv_path, truth_path};
}

AnalysisConfig synthetic_analysis_config(const std::filesystem::path& csv_path,
                                         const std::filesystem::path& output_dir) {
  AnalysisConfig c;
  c.input_path = csv_path.string();
  c.outcome_column = "net_output";
  c.treatment_column = "subsidy_per_ha";
  c.feature_columns = {"labor", "fixed_costs", "variable_costs", "subsidy_pillar2", "subsidy_national"};
  c.id_column = "unit_id";
  c.output_dir = output_dir.string();
  return c;
}

}  // namespace safefirst
