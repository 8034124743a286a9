#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "safefirst/analysis.hpp"
#include "safefirst/log.hpp"
#include "safefirst/policy.hpp"
#include "safefirst/rng.hpp"

namespace safefirst {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  written.push_back(path);
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::uint64_t bounded(Xoshiro256& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

std::string plot_header() {
  return "unit_id,actual_action,optimal_action,actual_expected_score,optimal_expected_score\n";
}

std::string plot_row(const CriterionEvaluation& ev, const MomentTable& table,
                     std::span<const std::string> ids, std::size_t i) {
  const auto& criterion = ev.report.criterion;
  const Action actual = ev.actual.actions[i];
  const Action optimal = ev.optimal.actions[i];
  return ids[i] + "," + std::to_string(actual) + "," + std::to_string(optimal) + "," +
         format_number(score_moments(table.at(i, actual), criterion).score) + "," +
         format_number(score_moments(table.at(i, optimal), criterion).score) + "\n";
}

}  // namespace

std::vector<std::filesystem::path> export_plot_data(const CriterionEvaluation& evaluation,
                                                    const MomentTable& table,
                                                    std::span<const std::string> unit_ids,
                                                    const std::filesystem::path& output_dir,
                                                    double fraction, std::uint64_t seed) {
  const std::size_t n = table.size();
  if (unit_ids.size() != n || evaluation.actual.size() != n || evaluation.optimal.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "plot data inputs differ in length");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sampling fraction must be in (0, 1]");
  }
  const std::string stem(to_string(evaluation.report.criterion.kind()));
  std::vector<std::filesystem::path> written;
  try {
    std::string full = plot_header();
    for (std::size_t i = 0; i < n; ++i) full += plot_row(evaluation, table, unit_ids, i);
    write_file(output_dir / (stem + ".plotdata.csv"), full, written);

    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Xoshiro256 rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
      std::swap(order[i], order[j]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::string sample = plot_header();
    for (std::size_t i : order) sample += plot_row(evaluation, table, unit_ids, i);
    write_file(output_dir / (stem + ".plotdata.sample.csv"), sample, written);
  } catch (...) {
    std::error_code ignored;
    for (const auto& f : written) std::filesystem::remove(f, ignored);
    throw;
  }
  return written;
}

AnalysisResult run_analysis(const AnalysisConfig& config) {
  config.validate();
  auto& log = logger();
  log.info("loading {}", config.input_path);
  const Dataset data = load_csv(config.input_path, config);
  const int M = data.action_set().size();
  log.info("n = {}, p = {}, actions = {}", data.size(), data.num_features(), M);

  const MomentModel model = fit_moments(data, config.regressor);
  const MomentTable table = predict_table(model, data);

  AnalysisResult result;
  auto& ctx = result.context;
  ctx.training_n = data.size();
  ctx.target = config.outcome_column;
  ctx.features = config.feature_columns;
  ctx.policy_variable = config.treatment_column;
  ctx.num_actions = M;

  const PropensityModel propensity = fit_propensity(data);
  ctx.propensity_converged = propensity.converged;
  if (!propensity.converged) {
    log.warn("propensity fit did not converge (gradient norm {}); overlap may be violated",
             propensity.gradient_norm);
  }
  if (config.overlap_threshold < 1.0 / M) {
    ctx.overlap = overlap_report(propensity, data, config.overlap_threshold);
    if (ctx.overlap->violation_count > 0) {
      log.warn("{} units have an estimated propensity below {}", ctx.overlap->violation_count,
               config.overlap_threshold);
    }
  } else {
    log.warn("overlap threshold {} is not below 1/{}; diagnostics skipped", config.overlap_threshold, M);
  }

  const std::filesystem::path out_dir(config.output_dir);
  try {
    std::filesystem::create_directories(out_dir);
    const auto family = LocationScaleFamily::from_name(config.family);
    for (std::size_t c = 0; c < config.criteria.size(); ++c) {
      const auto criterion = RiskCriterion::make(config.criteria[c], config.y_star, family);
      log.info("evaluating {}", to_string(criterion.kind()));
      auto evaluation = evaluate_criterion(table, data.actions(), criterion);
      const std::string stem(to_string(criterion.kind()));
      write_file(out_dir / (stem + ".report.txt"), render_report_text(evaluation.report, ctx),
                 result.files);
      write_file(out_dir / (stem + ".report.json"),
                 report_to_json(evaluation.report, ctx).dump(2) + "\n", result.files);
      const auto seed = Xoshiro256::substream(config.seed, static_cast<std::uint64_t>(criterion.kind()))();
      for (auto& f : export_plot_data(evaluation, table, data.unit_ids(), out_dir,
                                      config.plot_fraction, seed)) {
        result.files.push_back(std::move(f));
      }
      result.evaluations.push_back(std::move(evaluation));
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& f : result.files) std::filesystem::remove(f, ignored);
    throw;
  }
  return result;
}

}  // namespace safefirst
