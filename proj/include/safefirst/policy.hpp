#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "safefirst/core.hpp"
#include "safefirst/moments.hpp"

namespace safefirst {

/// Per-action criterion value. `score` is what the criterion maximizes (mu,
/// mu/sigma, mu/sigma^2, or the exceedance probability). `rank_key` is a
/// strictly increasing transform of the same preference used only to break
/// score-scale ties; for safety-first it is the standardized margin
/// (mu - y*)/sigma, which keeps saturated probabilities ordered.
struct CriterionScore {
  Action action = 0;
  double score = 0.0;
  double rank_key = 0.0;

  bool operator==(const CriterionScore&) const = default;
};

/// Pr(Y >= y*) under Y = mu + sigma * eps, eps ~ family: 1 - F((y* - mu)/sigma).
double exceedance_probability(const ConditionalMoments& m, double y_star,
                              const LocationScaleFamily& family);

CriterionScore score_moments(const ConditionalMoments& m, const RiskCriterion& criterion);

/// One score per action, in action order. Errors propagate from predict_moments.
std::vector<CriterionScore> score_actions(const MomentModel& model, std::span<const double> x,
                                          const RiskCriterion& criterion);

struct ActionChoice {
  Action action = 0;
  bool tie = false;
  /// Labels whose score lies within kTieEpsilon of the chosen one (including
  /// it), ascending. Empty unless `tie`.
  std::vector<Action> tied;
};

/// Argmax by score. Scores within kTieEpsilon are compared by rank_key, and
/// remaining ties go to the smallest action label. The result does not depend
/// on the order of `scores`. Requires at least two entries.
ActionChoice choose_action(std::span<const CriterionScore> scores);

/// Moments of every (unit, action) pair, row-major n x M.
class MomentTable {
 public:
  MomentTable(std::size_t n, ActionSet action_set, std::vector<ConditionalMoments> entries);

  std::size_t size() const noexcept { return n_; }
  const ActionSet& action_set() const noexcept { return action_set_; }
  const ConditionalMoments& at(std::size_t unit, Action a) const {
    return entries_[unit * static_cast<std::size_t>(action_set_.size()) +
                    static_cast<std::size_t>(a)];
  }
  std::span<const ConditionalMoments> unit(std::size_t i) const {
    const auto M = static_cast<std::size_t>(action_set_.size());
    return std::span<const ConditionalMoments>(entries_).subspan(i * M, M);
  }

  /// Same moments for every unit.
  static MomentTable homogeneous(std::size_t n, std::span<const ConditionalMoments> per_action);

 private:
  std::size_t n_;
  ActionSet action_set_;
  std::vector<ConditionalMoments> entries_;
};

/// Evaluates predict_moments for every unit and action (OpenMP over units).
/// Errors: DimensionMismatch when the model and data disagree on features.
MomentTable predict_table(const MomentModel& model, const Dataset& data);

/// Pointwise criterion-optimal assignment (OpenMP over units); source Optimal.
PolicyAssignment assign_policy(const MomentTable& table, const RiskCriterion& criterion);
PolicyAssignment assign_policy(const MomentModel& model, const Dataset& data,
                               const RiskCriterion& criterion);

/// The realized treatments as an assignment; source Actual.
PolicyAssignment actual_assignment(const Dataset& data, const RiskCriterion& criterion);

/// Serial implementations of the parallel kernels above. They define the
/// expected output and are what the tests and benchmark compare against.
namespace reference {

MomentTable predict_table(const MomentModel& model, const Dataset& data);
PolicyAssignment assign_policy(const MomentTable& table, const RiskCriterion& criterion);

}  // namespace reference

}  // namespace safefirst
