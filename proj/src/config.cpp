#include <cmath>
#include <fstream>
#include <set>

#include "safefirst/analysis.hpp"

namespace safefirst {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("key '" + key + "' has the wrong type");
  }
}

std::string method_name(RegressionMethod m) {
  return m == RegressionMethod::KNearest ? "knn" : "least_squares";
}

std::string basis_name(Basis b) { return b == Basis::Linear ? "linear" : "linear_plus_squares"; }

}  // namespace

void AnalysisConfig::validate() const {
  if (outcome_column.empty()) config_error("outcome column is not set");
  if (treatment_column.empty()) config_error("treatment column is not set");
  if (feature_columns.empty()) config_error("no feature columns");
  std::set<std::string> seen{outcome_column};
  if (!seen.insert(treatment_column).second) config_error("outcome and treatment columns coincide");
  for (const auto& f : feature_columns) {
    if (!seen.insert(f).second) config_error("column '" + f + "' is listed twice");
  }
  if (!id_column.empty() && seen.count(id_column) != 0) {
    config_error("id column '" + id_column + "' is also used as a variable");
  }
  if (n_bins < 2) config_error("n_bins must be at least 2");
  if (criteria.empty()) config_error("no criteria requested");
  if (std::set<CriterionKind>(criteria.begin(), criteria.end()).size() != criteria.size()) {
    config_error("a criterion is requested twice");
  }
  if (!std::isfinite(y_star)) config_error("y_star must be finite");
  if (family != "normal" && family != "logistic") config_error("unknown family '" + family + "'");
  if (regressor.knn_k < 1) config_error("knn_k must be positive");
  if (!(regressor.ridge_lambda >= 0.0)) config_error("ridge_lambda must be non-negative");
  if (!(plot_fraction > 0.0 && plot_fraction <= 1.0)) config_error("plot_fraction must be in (0, 1]");
  if (!(overlap_threshold > 0.0 && overlap_threshold < 1.0)) {
    config_error("overlap_threshold must be in (0, 1)");
  }
  if (output_dir.empty()) config_error("output_dir is empty");
}

AnalysisConfig config_from_json(const nlohmann::json& j, AnalysisConfig c) {
  if (!j.is_object()) config_error("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "input") {
      c.input_path = get_as<std::string>(value, key);
    } else if (key == "outcome") {
      c.outcome_column = get_as<std::string>(value, key);
    } else if (key == "treatment") {
      c.treatment_column = get_as<std::string>(value, key);
    } else if (key == "features") {
      c.feature_columns = get_as<std::vector<std::string>>(value, key);
    } else if (key == "id_column") {
      c.id_column = get_as<std::string>(value, key);
    } else if (key == "n_bins") {
      c.n_bins = get_as<int>(value, key);
    } else if (key == "discretize") {
      c.discretize = get_as<bool>(value, key);
    } else if (key == "criteria") {
      c.criteria.clear();
      for (const auto& name : get_as<std::vector<std::string>>(value, key)) {
        try {
          c.criteria.push_back(criterion_kind_from_string(name));
        } catch (const Error&) {
          config_error("unknown criterion '" + name + "'");
        }
      }
    } else if (key == "y_star") {
      c.y_star = get_as<double>(value, key);
    } else if (key == "family") {
      c.family = get_as<std::string>(value, key);
    } else if (key == "regressor") {
      const auto name = get_as<std::string>(value, key);
      if (name == "least_squares") {
        c.regressor.method = RegressionMethod::LeastSquares;
      } else if (name == "knn") {
        c.regressor.method = RegressionMethod::KNearest;
      } else {
        config_error("unknown regressor '" + name + "'");
      }
    } else if (key == "knn_k") {
      c.regressor.knn_k = get_as<int>(value, key);
    } else if (key == "ridge_lambda") {
      c.regressor.ridge_lambda = get_as<double>(value, key);
    } else if (key == "basis") {
      const auto name = get_as<std::string>(value, key);
      if (name == "linear") {
        c.regressor.basis = Basis::Linear;
      } else if (name == "linear_plus_squares") {
        c.regressor.basis = Basis::LinearPlusSquares;
      } else {
        config_error("unknown basis '" + name + "'");
      }
    } else if (key == "output_dir") {
      c.output_dir = get_as<std::string>(value, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, key);
    } else if (key == "plot_fraction") {
      c.plot_fraction = get_as<double>(value, key);
    } else if (key == "overlap_threshold") {
      c.overlap_threshold = get_as<double>(value, key);
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  return c;
}

nlohmann::json config_to_json(const AnalysisConfig& c) {
  nlohmann::json j;
  j["input"] = c.input_path;
  j["outcome"] = c.outcome_column;
  j["treatment"] = c.treatment_column;
  j["features"] = c.feature_columns;
  j["id_column"] = c.id_column;
  j["n_bins"] = c.n_bins;
  j["discretize"] = c.discretize;
  std::vector<std::string> criteria;
  for (auto k : c.criteria) criteria.emplace_back(to_string(k));
  j["criteria"] = criteria;
  j["y_star"] = c.y_star;
  j["family"] = c.family;
  j["regressor"] = method_name(c.regressor.method);
  j["knn_k"] = c.regressor.knn_k;
  j["ridge_lambda"] = c.regressor.ridge_lambda;
  j["basis"] = basis_name(c.regressor.basis);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["plot_fraction"] = c.plot_fraction;
  j["overlap_threshold"] = c.overlap_threshold;
  return j;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace safefirst
