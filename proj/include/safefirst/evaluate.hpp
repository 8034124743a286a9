#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "safefirst/core.hpp"
#include "safefirst/moments.hpp"
#include "safefirst/policy.hpp"

namespace safefirst {

/// Direct-Method value: the mean, over units, of the criterion score of the
/// assigned action. Per-unit scores are computed in parallel and reduced by
/// pairwise summation, so the result is independent of thread count.
/// Errors: DimensionMismatch (length), UnknownAction.
double value_direct(const MomentTable& table, const PolicyAssignment& assignment,
                    const RiskCriterion& criterion);
double value_direct(const MomentModel& model, const Dataset& data,
                    const PolicyAssignment& assignment, const RiskCriterion& criterion);

/// Share of outcomes at or above `y_star`. Requires a non-empty finite sample.
double safety_first_welfare_empirical(std::span<const double> outcomes, double y_star);

/// First-best minus alternative, both measured under the neutral criterion.
/// Logs a warning when the result is below -1e-9, which means the inputs did
/// not come from the same model and data.
double regret(double value_first_best, double value_alternative);

/// Errors: LengthMismatch.
double match_rate(const PolicyAssignment& actual, const PolicyAssignment& optimal);

struct ActionFrequency {
  Action action = 0;
  std::size_t count = 0;
  double percent = 0.0;

  bool operator==(const ActionFrequency&) const = default;
};

struct FrequencyTable {
  std::vector<ActionFrequency> rows;
  std::size_t total = 0;
  double total_percent = 0.0;

  bool operator==(const FrequencyTable&) const = default;
};

/// Errors: UnknownAction.
FrequencyTable action_frequencies(const PolicyAssignment& assignment, const ActionSet& action_set);

/// Plug-in variance of the outcome a policy produces,
/// mean(sigma^2) + var(mu) over the assigned actions. Descriptive only.
double policy_return_variance(const MomentTable& table, const PolicyAssignment& assignment);

struct EvaluationReport {
  RiskCriterion criterion = RiskCriterion::neutral();
  double value_actual = 0.0;
  double value_optimal = 0.0;
  /// Neutral-metric value of the neutral optimum minus that of this
  /// criterion's optimum; zero for the neutral criterion itself.
  double regret_vs_first_best = 0.0;
  double match_rate = 0.0;
  FrequencyTable action_frequencies;
  FrequencyTable optimal_action_frequencies;
  double return_variance_actual = 0.0;
  double return_variance_optimal = 0.0;
  std::size_t n_used = 0;
  std::size_t tie_count = 0;
  std::size_t floored_count = 0;

  bool operator==(const EvaluationReport&) const = default;
};

struct CriterionEvaluation {
  EvaluationReport report;
  PolicyAssignment actual;
  PolicyAssignment optimal;
};

/// Builds the actual and optimal assignments for one criterion and fills the
/// report from a shared moment table. `realized` supplies the actual policy.
CriterionEvaluation evaluate_criterion(const MomentTable& table, std::span<const Action> realized,
                                       const RiskCriterion& criterion);

namespace reference {

double value_direct(const MomentTable& table, const PolicyAssignment& assignment,
                    const RiskCriterion& criterion);

}  // namespace reference

}  // namespace safefirst
