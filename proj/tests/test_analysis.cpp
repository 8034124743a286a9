#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "safefirst/analysis.hpp"
#include "safefirst/policy.hpp"

using namespace safefirst;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::current_path() / "scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

AnalysisConfig small_config(const fs::path& csv, const fs::path& out) {
  AnalysisConfig c;
  c.input_path = csv.string();
  c.outcome_column = "y";
  c.treatment_column = "t";
  c.feature_columns = {"a", "b"};
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("discretize_treatment examples") {
  const std::vector<double> nine = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(discretize_treatment(nine, 3) == std::vector<Action>{0, 0, 0, 1, 1, 1, 2, 2, 2});
  // order of the input is preserved
  const std::vector<double> shuffled = {9, 1, 5, 2, 8, 3, 7, 4, 6};
  CHECK(discretize_treatment(shuffled, 3) == std::vector<Action>{2, 0, 1, 0, 2, 0, 2, 1, 1});
  CHECK(code_of([] { discretize_treatment(std::vector<double>(5, 2.0), 3); }) ==
        ErrorCode::DegenerateDistribution);
  CHECK(code_of([] { discretize_treatment(std::vector<double>{1, 2}, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { discretize_treatment(std::vector<double>{1, std::nan(""), 3}, 2); }) ==
        ErrorCode::NonFiniteValue);

  // ties at a cut point fall in the lower bin
  const std::vector<double> tied = {1, 2, 2, 2, 2, 3, 4, 5, 6};
  const auto bins = discretize_treatment(tied, 3);
  CHECK(bins == std::vector<Action>{0, 0, 0, 0, 0, 1, 2, 2, 2});
  std::size_t total = 0;
  for (Action b = 0; b < 3; ++b) total += static_cast<std::size_t>(std::count(bins.begin(), bins.end(), b));
  CHECK(total == tied.size());
}

TEST_CASE("config JSON round trip and validation") {
  AnalysisConfig c;
  c.input_path = "data.csv";
  c.outcome_column = "y";
  c.treatment_column = "t";
  c.feature_columns = {"a", "b"};
  c.criteria = {CriterionKind::SafetyFirst, CriterionKind::Neutral};
  c.y_star = 1.25;
  c.family = "logistic";
  c.regressor.method = RegressionMethod::KNearest;
  c.regressor.knn_k = 7;
  c.seed = 99;
  CHECK(config_from_json(config_to_json(c)) == c);

  CHECK(code_of([] { config_from_json(nlohmann::json{{"bogus", 1}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(nlohmann::json{{"n_bins", "three"}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json(nlohmann::json{{"criteria", {"minimax"}}}); }) == ErrorCode::ConfigError);

  auto bad = c;
  bad.n_bins = 1;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
  bad = c;
  bad.criteria.clear();
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
  bad = c;
  bad.feature_columns = {"a", "y"};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("CSV reading and loading") {
  const auto dir = scratch("csv");
  write(dir / "ok.csv", "\xEF\xBB\xBFy,t,a,b\r\n1.5,1,0.1,\"2\"\r\n2.5,2,0.2,3\r\n3.5,3,0.3,4\r\n");
  const auto table = read_csv(dir / "ok.csv");
  CHECK(table.header == std::vector<std::string>{"y", "t", "a", "b"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][3] == "2");

  const auto data = load_csv(dir / "ok.csv", small_config(dir / "ok.csv", dir));
  CHECK(data.size() == 3);
  CHECK(data.num_features() == 2);
  CHECK(std::ranges::equal(data.actions(), std::vector<Action>{0, 1, 2}));
  CHECK(data.outcomes()[2] == 3.5);

  auto missing = small_config(dir / "ok.csv", dir);
  missing.feature_columns = {"a", "zzz"};
  try {
    load_csv(dir / "ok.csv", missing);
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }

  write(dir / "nan.csv", "y,t,a,b\n1,1,0,0\nNaN,2,0,0\n3,3,0,0\n");
  try {
    load_csv(dir / "nan.csv", small_config(dir / "nan.csv", dir));
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }

  write(dir / "text.csv", "y,t,a,b\n1,1,0,0\nabc,2,0,0\n3,3,0,0\n");
  CHECK(code_of([&] { load_csv(dir / "text.csv", small_config(dir / "text.csv", dir)); }) ==
        ErrorCode::ParseError);
  write(dir / "ragged.csv", "y,t,a,b\n1,1,0\n");
  CHECK(code_of([&] { read_csv(dir / "ragged.csv"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_csv(dir / "absent.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("report JSON round trip and text sections") {
  const std::vector<ConditionalMoments> two = {{0, 30.0, 10.0, false}, {1, 75.0, 65.0, true}};
  const auto table = MomentTable::homogeneous(5, two);
  const std::vector<Action> realized = {0, 1, 1, 0, 1};
  ReportContext ctx;
  ctx.training_n = 5;
  ctx.target = "net_output";
  ctx.features = {"labor", "costs"};
  ctx.policy_variable = "subsidy";
  ctx.num_actions = 2;
  OverlapDiagnostics od;
  od.per_action = {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
  od.violation_count = 1;
  od.threshold = 0.01;
  od.n = 5;
  ctx.overlap = od;
  ctx.propensity_converged = false;

  for (const auto& criterion :
       {RiskCriterion::neutral(), RiskCriterion::quadratic(),
        RiskCriterion::safety_first(0.1 + 0.2, LocationScaleFamily::logistic())}) {
    const auto ev = evaluate_criterion(table, realized, criterion);
    const auto j = report_to_json(ev.report, ctx);
    const auto reparsed = nlohmann::json::parse(j.dump(2));
    CHECK(report_from_json(reparsed) == ev.report);
    CHECK(context_from_json(reparsed) == ctx);

    const auto text = render_report_text(ev.report, ctx);
    for (const char* header : {"Data Information", "Policy Information",
                               "Frequencies of the actions (training data)", "Training Data Results",
                               "New Data Results", "Overlap Diagnostics"}) {
      CHECK(text.find(header) != std::string::npos);
    }
  }
  CHECK(code_of([] { report_from_json(nlohmann::json{{"criterion", "neutral"}}); }) == ErrorCode::ParseError);
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.n = 5000;
  const auto a = generate_synthetic_data(spec, 7);
  const auto b = generate_synthetic_data(spec, 7);
  CHECK(a.table.rows == b.table.rows);
  CHECK(a.levels.size() == 5000);

  // ground truth: neutral and mu/sigma optima differ on at least 20% of units
  std::size_t differ = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<ConditionalMoments> m;
    for (int t = 0; t < 3; ++t) {
      m.push_back({t, a.true_mu[i * 3 + static_cast<std::size_t>(t)], a.true_sigma[i * 3 + static_cast<std::size_t>(t)], false});
    }
    std::vector<CriterionScore> rn;
    std::vector<CriterionScore> ra;
    for (const auto& x : m) {
      rn.push_back(score_moments(x, RiskCriterion::neutral()));
      ra.push_back(score_moments(x, RiskCriterion::linear()));
    }
    differ += choose_action(rn).action != choose_action(ra).action ? 1 : 0;
  }
  CHECK(static_cast<double>(differ) >= 0.2 * static_cast<double>(spec.n));

  const auto dir = scratch("synth");
  const auto files = generate_synthetic(spec, 7, dir / "farms.csv");
  REQUIRE(files.size() == 2);
  CHECK(fs::exists(dir / "farms.truth.csv"));
  const auto first = slurp(dir / "farms.csv");
  generate_synthetic(spec, 7, dir / "farms.csv");
  CHECK(slurp(dir / "farms.csv") == first);
  const auto data = load_csv(dir / "farms.csv", synthetic_analysis_config(dir / "farms.csv", dir));
  CHECK(data.size() == 5000);
  CHECK(data.num_features() == 5);
  CHECK(data.unit_ids()[0] == "F000001");
}

TEST_CASE("run_analysis writes reports, plot data, and is deterministic") {
  const auto dir = scratch("pipeline");
  SyntheticSpec spec;
  spec.n = 200;
  generate_synthetic(spec, 3, dir / "farms.csv");
  const auto input_before = slurp(dir / "farms.csv");

  auto config = synthetic_analysis_config(dir / "farms.csv", dir / "run1");
  config.plot_fraction = 1.0;
  const auto r1 = run_analysis(config);
  CHECK(r1.evaluations.size() == 4);
  CHECK(r1.files.size() == 16);
  for (const auto& ev : r1.evaluations) {
    CHECK(ev.report.value_optimal >= ev.report.value_actual - 1e-12);
    const std::string stem(to_string(ev.report.criterion.kind()));
    const auto plot = dir / "run1" / (stem + ".plotdata.csv");
    CHECK(line_count(plot) == 201);
    CHECK(slurp(plot).rfind(
              "unit_id,actual_action,optimal_action,actual_expected_score,optimal_expected_score\n", 0) == 0);
    CHECK(line_count(dir / "run1" / (stem + ".plotdata.sample.csv")) == 201);
    const auto j = nlohmann::json::parse(slurp(dir / "run1" / (stem + ".report.json")));
    CHECK(report_from_json(j) == ev.report);
  }

  config.output_dir = (dir / "run2").string();
  run_analysis(config);
  for (const auto& f : r1.files) {
    CHECK(slurp(f) == slurp(dir / "run2" / f.filename()));
  }
  CHECK(slurp(dir / "farms.csv") == input_before);

  // a small fraction keeps round(f n) rows
  config.output_dir = (dir / "run3").string();
  config.plot_fraction = 0.05;
  config.criteria = {CriterionKind::Neutral};
  const auto r3 = run_analysis(config);
  CHECK(r3.files.size() == 4);
  CHECK(line_count(dir / "run3" / "neutral.plotdata.sample.csv") == 11);

  // safety-first at the median outcome yields a probability-valued report
  config.output_dir = (dir / "run4").string();
  config.criteria = {CriterionKind::SafetyFirst};
  const auto data = load_csv(dir / "farms.csv", config);
  std::vector<double> y(data.outcomes().begin(), data.outcomes().end());
  std::nth_element(y.begin(), y.begin() + 100, y.end());
  config.y_star = y[100];
  const auto r4 = run_analysis(config);
  const auto& sf = r4.evaluations.at(0).report;
  CHECK(sf.value_actual >= 0.0);
  CHECK(sf.value_optimal <= 1.0);
}

TEST_CASE("run_analysis removes partial output on failure") {
  const auto dir = scratch("failure");
  // two features that are exact copies, with no ridge, make the design singular
  std::string csv = "y,t,a,b\n";
  for (int i = 0; i < 30; ++i) {
    csv += std::to_string(i % 7) + "," + std::to_string(i) + "," + std::to_string(i % 5) + "," +
           std::to_string(i % 5) + "\n";
  }
  write(dir / "dup.csv", csv);
  auto config = small_config(dir / "dup.csv", dir / "out");
  config.regressor.ridge_lambda = 0.0;
  CHECK(code_of([&] { run_analysis(config); }) == ErrorCode::SingularDesign);
  CHECK((!fs::exists(dir / "out") || fs::is_empty(dir / "out")));
}

TEST_CASE("format_number round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}
