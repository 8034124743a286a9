#include "safefirst/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace safefirst {

double exceedance_probability(const ConditionalMoments& m, double y_star,
                              const LocationScaleFamily& family) {
  const long double z = (static_cast<long double>(y_star) - m.mu) / m.sigma;
  return std::clamp(family.survival(static_cast<double>(z)), 0.0, 1.0);
}

CriterionScore score_moments(const ConditionalMoments& m, const RiskCriterion& criterion) {
  const long double mu = m.mu;
  const long double sigma = m.sigma;
  CriterionScore s;
  s.action = m.action;
  switch (criterion.kind()) {
    case CriterionKind::Neutral:
      s.score = m.mu;
      s.rank_key = m.mu;
      break;
    case CriterionKind::LinearRA:
      s.score = static_cast<double>(mu / sigma);
      s.rank_key = s.score;
      break;
    case CriterionKind::QuadraticRA:
      s.score = static_cast<double>(mu / (sigma * sigma));
      s.rank_key = s.score;
      break;
    case CriterionKind::SafetyFirst:
      s.score = exceedance_probability(m, criterion.y_star(), *criterion.family());
      s.rank_key = static_cast<double>((mu - criterion.y_star()) / sigma);
      break;
  }
  return s;
}

std::vector<CriterionScore> score_actions(const MomentModel& model, std::span<const double> x,
                                          const RiskCriterion& criterion) {
  std::vector<CriterionScore> out;
  out.reserve(static_cast<std::size_t>(model.action_set().size()));
  for (Action a : model.action_set().labels()) {
    out.push_back(score_moments(predict_moments(model, x, a), criterion));
  }
  return out;
}

ActionChoice choose_action(std::span<const CriterionScore> scores) {
  if (scores.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two scores");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].action < scores[b].action; });

  std::size_t best = order.front();
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& cand = scores[order[k]];
    const double gap = cand.score - scores[best].score;
    if (gap >= kTieEpsilon) {
      best = order[k];
    } else if (std::abs(gap) < kTieEpsilon &&
               cand.rank_key - scores[best].rank_key >= kTieEpsilon) {
      best = order[k];
    }
  }

  ActionChoice choice;
  choice.action = scores[best].action;
  for (std::size_t k : order) {
    if (std::abs(scores[best].score - scores[k].score) < kTieEpsilon) {
      choice.tied.push_back(scores[k].action);
    }
  }
  choice.tie = choice.tied.size() > 1;
  if (!choice.tie) choice.tied.clear();
  return choice;
}

// ---------------------------------------------------------------------------

MomentTable::MomentTable(std::size_t n, ActionSet action_set, std::vector<ConditionalMoments> entries)
    : n_(n), action_set_(action_set), entries_(std::move(entries)) {
  if (entries_.size() != n_ * static_cast<std::size_t>(action_set_.size())) {
    throw Error(ErrorCode::LengthMismatch, "moment table has the wrong number of entries");
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& m = entries_[k];
    if (m.action != static_cast<Action>(k % static_cast<std::size_t>(action_set_.size()))) {
      throw Error(ErrorCode::UnknownAction, "moment table entries must be in action order");
    }
    if (!std::isfinite(m.mu) || !(m.sigma > 0.0) || !std::isfinite(m.sigma)) {
      throw Error(ErrorCode::NonFiniteValue, "moment table entry " + std::to_string(k));
    }
  }
}

MomentTable MomentTable::homogeneous(std::size_t n, std::span<const ConditionalMoments> per_action) {
  std::vector<ConditionalMoments> entries;
  entries.reserve(n * per_action.size());
  for (std::size_t i = 0; i < n; ++i) entries.insert(entries.end(), per_action.begin(), per_action.end());
  return MomentTable(n, ActionSet(static_cast<int>(per_action.size())), std::move(entries));
}

namespace {

void check_dimensions(const MomentModel& model, const Dataset& data) {
  if (model.num_features() != data.num_features()) {
    throw Error(ErrorCode::DimensionMismatch,
                "model has " + std::to_string(model.num_features()) + " features, data has " +
                    std::to_string(data.num_features()));
  }
  if (model.action_set() != data.action_set()) {
    throw Error(ErrorCode::DimensionMismatch, "model and data disagree on the action set");
  }
}

void predict_unit(const MomentModel& model, const Dataset& data, std::size_t i,
                  std::vector<ConditionalMoments>& entries) {
  const auto M = static_cast<std::size_t>(model.action_set().size());
  for (std::size_t a = 0; a < M; ++a) {
    entries[i * M + a] = predict_moments(model, data.features(i), static_cast<Action>(a));
  }
}

void assign_unit(const MomentTable& table, const RiskCriterion& criterion, std::size_t i,
                 std::vector<Action>& actions, std::vector<std::vector<Action>>& tied) {
  const auto moments = table.unit(i);
  std::vector<CriterionScore> scores;
  scores.reserve(moments.size());
  for (const auto& m : moments) scores.push_back(score_moments(m, criterion));
  auto choice = choose_action(scores);
  actions[i] = choice.action;
  tied[i] = std::move(choice.tied);
}

PolicyAssignment collect(const RiskCriterion& criterion, std::vector<Action> actions,
                         std::vector<std::vector<Action>> tied) {
  PolicyAssignment out;
  out.actions = std::move(actions);
  out.criterion = criterion;
  out.source = AssignmentSource::Optimal;
  for (std::size_t i = 0; i < tied.size(); ++i) {
    if (!tied[i].empty()) out.ties.push_back({i, std::move(tied[i])});
  }
  return out;
}

}  // namespace

MomentTable predict_table(const MomentModel& model, const Dataset& data) {
  check_dimensions(model, data);
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::vector<ConditionalMoments> entries(data.size() *
                                          static_cast<std::size_t>(model.action_set().size()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    predict_unit(model, data, static_cast<std::size_t>(i), entries);
  }
  return MomentTable(data.size(), model.action_set(), std::move(entries));
}

PolicyAssignment assign_policy(const MomentTable& table, const RiskCriterion& criterion) {
  const auto n = static_cast<std::ptrdiff_t>(table.size());
  std::vector<Action> actions(table.size());
  std::vector<std::vector<Action>> tied(table.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    assign_unit(table, criterion, static_cast<std::size_t>(i), actions, tied);
  }
  return collect(criterion, std::move(actions), std::move(tied));
}

PolicyAssignment assign_policy(const MomentModel& model, const Dataset& data,
                               const RiskCriterion& criterion) {
  return assign_policy(predict_table(model, data), criterion);
}

PolicyAssignment actual_assignment(const Dataset& data, const RiskCriterion& criterion) {
  PolicyAssignment out;
  out.actions.assign(data.actions().begin(), data.actions().end());
  out.criterion = criterion;
  out.source = AssignmentSource::Actual;
  return out;
}

namespace reference {

MomentTable predict_table(const MomentModel& model, const Dataset& data) {
  check_dimensions(model, data);
  std::vector<ConditionalMoments> entries(data.size() *
                                          static_cast<std::size_t>(model.action_set().size()));
  for (std::size_t i = 0; i < data.size(); ++i) predict_unit(model, data, i, entries);
  return MomentTable(data.size(), model.action_set(), std::move(entries));
}

PolicyAssignment assign_policy(const MomentTable& table, const RiskCriterion& criterion) {
  std::vector<Action> actions(table.size());
  std::vector<std::vector<Action>> tied(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) assign_unit(table, criterion, i, actions, tied);
  return collect(criterion, std::move(actions), std::move(tied));
}

}  // namespace reference

}  // namespace safefirst
