#include "safefirst/evaluate.hpp"

#include <cmath>

#include "safefirst/log.hpp"
#include "safefirst/numeric.hpp"

namespace safefirst {

namespace {

void check_assignment(const MomentTable& table, const PolicyAssignment& assignment) {
  if (assignment.size() != table.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "assignment has " + std::to_string(assignment.size()) + " units, evaluation data has " +
                    std::to_string(table.size()));
  }
  check_membership(assignment, table.action_set());
}

double unit_score(const MomentTable& table, const PolicyAssignment& assignment,
                  const RiskCriterion& criterion, std::size_t i) {
  return score_moments(table.at(i, assignment.actions[i]), criterion).score;
}

}  // namespace

double value_direct(const MomentTable& table, const PolicyAssignment& assignment,
                    const RiskCriterion& criterion) {
  check_assignment(table, assignment);
  const auto n = static_cast<std::ptrdiff_t>(table.size());
  std::vector<double> scores(table.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    scores[u] = unit_score(table, assignment, criterion, u);
  }
  return pairwise_mean(scores);
}

double value_direct(const MomentModel& model, const Dataset& data,
                    const PolicyAssignment& assignment, const RiskCriterion& criterion) {
  if (assignment.size() != data.size()) {
    throw Error(ErrorCode::DimensionMismatch, "assignment length differs from the data");
  }
  return value_direct(predict_table(model, data), assignment, criterion);
}

double safety_first_welfare_empirical(std::span<const double> outcomes, double y_star) {
  if (outcomes.empty()) throw Error(ErrorCode::InvalidArgument, "no outcomes");
  std::size_t hits = 0;
  for (double y : outcomes) {
    if (!std::isfinite(y)) throw Error(ErrorCode::NonFiniteValue, "outcome is not finite");
    if (y >= y_star) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double regret(double value_first_best, double value_alternative) {
  const double r = value_first_best - value_alternative;
  if (r < -1e-9) {
    logger().warn("negative regret {} (first-best {} < alternative {}); inputs are inconsistent", r,
                  value_first_best, value_alternative);
  }
  return r;
}

double match_rate(const PolicyAssignment& actual, const PolicyAssignment& optimal) {
  if (actual.size() != optimal.size()) {
    throw Error(ErrorCode::LengthMismatch, "assignments have different lengths");
  }
  if (actual.size() == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual.actions[i] == optimal.actions[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(actual.size());
}

FrequencyTable action_frequencies(const PolicyAssignment& assignment, const ActionSet& action_set) {
  check_membership(assignment, action_set);
  FrequencyTable table;
  table.total = assignment.size();
  for (Action a : action_set.labels()) table.rows.push_back({a, 0, 0.0});
  for (Action a : assignment.actions) ++table.rows[static_cast<std::size_t>(a)].count;
  if (table.total == 0) return table;
  for (auto& row : table.rows) {
    row.percent = 100.0 * static_cast<double>(row.count) / static_cast<double>(table.total);
  }
  table.total_percent = 100.0;
  return table;
}

double policy_return_variance(const MomentTable& table, const PolicyAssignment& assignment) {
  check_assignment(table, assignment);
  std::vector<double> mu(table.size());
  std::vector<double> var(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& m = table.at(i, assignment.actions[i]);
    mu[i] = m.mu;
    var[i] = m.sigma * m.sigma;
  }
  const double mean_mu = pairwise_mean(mu);
  for (double& v : mu) v = (v - mean_mu) * (v - mean_mu);
  return pairwise_mean(var) + pairwise_mean(mu);
}

CriterionEvaluation evaluate_criterion(const MomentTable& table, std::span<const Action> realized,
                                       const RiskCriterion& criterion) {
  if (realized.size() != table.size()) {
    throw Error(ErrorCode::DimensionMismatch, "realized actions do not match the moment table");
  }
  CriterionEvaluation out;
  out.actual.actions.assign(realized.begin(), realized.end());
  out.actual.criterion = criterion;
  out.actual.source = AssignmentSource::Actual;
  out.optimal = assign_policy(table, criterion);

  auto& r = out.report;
  r.criterion = criterion;
  r.value_actual = value_direct(table, out.actual, criterion);
  r.value_optimal = value_direct(table, out.optimal, criterion);

  const auto neutral = RiskCriterion::neutral();
  if (criterion.kind() == CriterionKind::Neutral) {
    r.regret_vs_first_best = 0.0;
  } else {
    const auto first_best = assign_policy(table, neutral);
    r.regret_vs_first_best =
        regret(value_direct(table, first_best, neutral), value_direct(table, out.optimal, neutral));
  }
  r.match_rate = match_rate(out.actual, out.optimal);
  r.action_frequencies = action_frequencies(out.actual, table.action_set());
  r.optimal_action_frequencies = action_frequencies(out.optimal, table.action_set());
  r.return_variance_actual = policy_return_variance(table, out.actual);
  r.return_variance_optimal = policy_return_variance(table, out.optimal);
  r.n_used = table.size();
  r.tie_count = out.optimal.ties.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (const auto& m : table.unit(i)) r.floored_count += m.floored ? 1 : 0;
  }

  if (r.value_optimal < r.value_actual - 1e-9) {
    logger().warn("{}: optimal value {} below actual {}", to_string(criterion.kind()),
                  r.value_optimal, r.value_actual);
  }
  return out;
}

namespace reference {

double value_direct(const MomentTable& table, const PolicyAssignment& assignment,
                    const RiskCriterion& criterion) {
  check_assignment(table, assignment);
  std::vector<double> scores(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) scores[i] = unit_score(table, assignment, criterion, i);
  return pairwise_mean(scores);
}

}  // namespace reference

}  // namespace safefirst
