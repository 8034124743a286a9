#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "safefirst/core.hpp"

namespace safefirst {

enum class RegressionMethod { LeastSquares, KNearest };
enum class Basis { Linear, LinearPlusSquares };

struct RegressorConfig {
  RegressionMethod method = RegressionMethod::LeastSquares;
  int knn_k = 25;
  double ridge_lambda = 1e-8;
  Basis basis = Basis::LinearPlusSquares;

  bool operator==(const RegressorConfig&) const = default;
};

/// Per-action regressions of Y and Y^2 on the covariates. The conditional
/// variance is the plug-in E[Y^2|x] - E[Y|x]^2, clamped at a floor.
///
/// Least squares runs on covariates standardized by the full training sample,
/// with an unpenalized intercept and a ridge penalty on every other basis
/// coefficient. k-nearest neighbours uses Euclidean distance in the same
/// standardized space; equal distances are broken by row order.
class MomentModel {
 public:
  const RegressorConfig& config() const noexcept { return config_; }
  const ActionSet& action_set() const noexcept { return action_set_; }
  double variance_floor() const noexcept { return variance_floor_; }
  std::size_t training_n() const noexcept { return training_n_; }
  std::size_t num_features() const noexcept { return center_.size(); }

  /// Raw regression outputs; no validation of `t` or `x`.
  double predict_mean(std::span<const double> x, Action t) const;
  double predict_second_moment(std::span<const double> x, Action t) const;

 private:
  friend MomentModel fit_moments(const Dataset&, const RegressorConfig&, double);

  struct LinearFit {
    std::vector<double> mean_coef;
    std::vector<double> second_coef;
  };
  struct NeighbourFit {
    std::vector<double> points;  // standardized, row-major
    std::vector<double> y;
    std::vector<double> y2;
  };

  MomentModel(RegressorConfig config, ActionSet action_set, double floor)
      : config_(config), action_set_(action_set), variance_floor_(floor) {}

  std::vector<double> standardize(std::span<const double> x) const;
  std::vector<double> basis_row(std::span<const double> z) const;
  std::vector<std::size_t> neighbours(const NeighbourFit& fit, std::span<const double> z) const;

  RegressorConfig config_;
  ActionSet action_set_;
  double variance_floor_;
  std::size_t training_n_ = 0;
  std::vector<double> center_;
  std::vector<double> scale_;
  std::vector<LinearFit> linear_;
  std::vector<NeighbourFit> knn_;
};

/// Fits one mean and one second-moment regressor per action on that action's
/// cell. Deterministic in (data, config).
/// Errors: InsufficientCellSize, SingularDesign, InvalidArgument.
MomentModel fit_moments(const Dataset& data, const RegressorConfig& config = {},
                        double variance_floor = kVarianceFloor);

/// Errors: UnknownAction, DimensionMismatch.
ConditionalMoments predict_moments(const MomentModel& model, std::span<const double> x, Action t);

// ---------------------------------------------------------------------------
// Propensity and overlap diagnostics

struct PropensityOptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
  /// Newton iterations stop, and the fit is flagged as not converged, once a
  /// coefficient on the standardized scale exceeds this magnitude. Under
  /// complete separation the likelihood has no maximizer and coefficients
  /// diverge.
  double coefficient_bound = 30.0;
};

/// Multinomial logit for Pr(T = t | X = x), action 0 as reference category.
struct PropensityModel {
  ActionSet action_set{2};
  std::vector<double> center;
  std::vector<double> scale;
  /// (M-1) rows of (intercept, slopes...) for actions 1..M-1.
  std::vector<std::vector<double>> coefficients;
  bool converged = false;
  double gradient_norm = 0.0;
  int iterations = 0;

  /// One probability per action, summing to 1.
  std::vector<double> predict(std::span<const double> x) const;
};

/// Maximum-likelihood fit by damped Newton. Non-convergence is reported via
/// `converged == false` and `gradient_norm`, never thrown.
PropensityModel fit_propensity(const Dataset& data, const PropensityOptions& options = {});

struct PropensitySummary {
  double min = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double max = 0.0;

  bool operator==(const PropensitySummary&) const = default;
};

struct OverlapDiagnostics {
  std::vector<PropensitySummary> per_action;
  std::size_t violation_count = 0;
  double threshold = 0.01;
  std::size_t n = 0;

  bool operator==(const OverlapDiagnostics&) const = default;
};

/// Quantiles use the type-1 (inverse empirical CDF) rule. A unit violates
/// overlap when any of its predicted propensities is below `threshold`.
/// Requires 0 < threshold < 1/M (InvalidArgument otherwise).
OverlapDiagnostics overlap_report(const PropensityModel& model, const Dataset& data,
                                  double threshold = 0.01);

}  // namespace safefirst
