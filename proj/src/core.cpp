#include "safefirst/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "safefirst/numeric.hpp"

namespace safefirst {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::EmptyActionCell: return "EmptyActionCell";
    case ErrorCode::InsufficientCellSize: return "InsufficientCellSize";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonBinaryAction: return "NonBinaryAction";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// ActionSet

ActionSet::ActionSet(int size) : size_(size) {
  if (size < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "an action set needs at least 2 actions, got " + std::to_string(size));
  }
}

std::vector<Action> ActionSet::labels() const {
  std::vector<Action> out(static_cast<std::size_t>(size_));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

std::vector<std::size_t> Dataset::cell(Action a) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i] == a) rows.push_back(i);
  }
  return rows;
}

RawDataset Dataset::to_raw() const {
  RawDataset raw;
  raw.outcomes = outcomes_;
  raw.actions.assign(actions_.begin(), actions_.end());
  raw.features = features_;
  raw.num_features = num_features_;
  raw.feature_names = feature_names_;
  raw.unit_ids = unit_ids_;
  return raw;
}

Dataset validate_dataset(const RawDataset& raw, const ActionSet& action_set) {
  const std::size_t n = raw.outcomes.size();
  if (n == 0) throw Error(ErrorCode::LengthMismatch, "dataset has no rows");
  if (raw.actions.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "actions has " + std::to_string(raw.actions.size()) +
                                               " entries, outcomes has " + std::to_string(n));
  }
  if (raw.features.size() != n * raw.num_features) {
    throw Error(ErrorCode::LengthMismatch,
                "feature matrix has " + std::to_string(raw.features.size()) + " entries, expected " +
                    std::to_string(n) + " x " + std::to_string(raw.num_features));
  }
  if (!raw.feature_names.empty() && raw.feature_names.size() != raw.num_features) {
    throw Error(ErrorCode::LengthMismatch, "feature_names does not match the feature count");
  }
  if (!raw.unit_ids.empty() && raw.unit_ids.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "unit_ids does not match the row count");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(raw.outcomes[i])) {
      throw Error(ErrorCode::NonFiniteValue, "outcome at row " + std::to_string(i));
    }
  }
  for (std::size_t k = 0; k < raw.features.size(); ++k) {
    if (!std::isfinite(raw.features[k])) {
      throw Error(ErrorCode::NonFiniteValue,
                  "feature " + std::to_string(k % raw.num_features) + " at row " +
                      std::to_string(k / raw.num_features));
    }
  }

  std::vector<std::size_t> counts(static_cast<std::size_t>(action_set.size()), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!action_set.contains(raw.actions[i])) {
      throw Error(ErrorCode::UnknownAction, "action " + std::to_string(raw.actions[i]) +
                                                " at row " + std::to_string(i));
    }
    ++counts[static_cast<std::size_t>(raw.actions[i])];
  }
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) {
      throw Error(ErrorCode::EmptyActionCell, "action " + std::to_string(a) + " is never observed");
    }
  }

  Dataset data(action_set);
  data.outcomes_ = raw.outcomes;
  data.actions_.assign(raw.actions.begin(), raw.actions.end());
  data.features_ = raw.features;
  data.num_features_ = raw.num_features;
  data.feature_names_ = raw.feature_names;
  if (data.feature_names_.empty()) {
    for (std::size_t j = 0; j < raw.num_features; ++j) {
      data.feature_names_.push_back("x" + std::to_string(j + 1));
    }
  }
  data.unit_ids_ = raw.unit_ids;
  if (data.unit_ids_.empty()) {
    for (std::size_t i = 0; i < n; ++i) data.unit_ids_.push_back(std::to_string(i + 1));
  }
  return data;
}

Dataset validate_dataset(const Dataset& data) {
  return validate_dataset(data.to_raw(), data.action_set());
}

// ---------------------------------------------------------------------------
// LocationScaleFamily

LocationScaleFamily LocationScaleFamily::normal() { return {Kind::Normal, "normal"}; }

LocationScaleFamily LocationScaleFamily::logistic() { return {Kind::Logistic, "logistic"}; }

LocationScaleFamily LocationScaleFamily::tabulated(std::string name, std::vector<double> z,
                                                   std::vector<double> cdf) {
  if (z.size() != cdf.size() || z.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "tabulated CDF needs >= 2 matching knots");
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i]) || !std::isfinite(cdf[i]) || cdf[i] < 0.0 || cdf[i] > 1.0) {
      throw Error(ErrorCode::InvalidArgument, "tabulated CDF knot " + std::to_string(i));
    }
    if (i > 0 && (z[i] <= z[i - 1] || cdf[i] < cdf[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "tabulated CDF must be monotone at knot " +
                                                  std::to_string(i));
    }
  }
  if (cdf.front() > 1e-9 || cdf.back() < 1.0 - 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "tabulated CDF must run from 0 to 1");
  }
  LocationScaleFamily family(Kind::Tabulated, std::move(name));
  family.knots_ = std::move(z);
  family.knot_cdf_ = std::move(cdf);
  return family;
}

LocationScaleFamily LocationScaleFamily::from_name(std::string_view name) {
  if (name == "normal") return normal();
  if (name == "logistic") return logistic();
  throw Error(ErrorCode::InvalidArgument, "unknown location-scale family '" + std::string(name) + "'");
}

double LocationScaleFamily::cdf(double z) const {
  switch (kind_) {
    case Kind::Normal:
      return static_cast<double>(normal_cdf(z));
    case Kind::Logistic:
      return static_cast<double>(1.0L / (1.0L + std::exp(-static_cast<long double>(z))));
    case Kind::Tabulated: {
      if (z <= knots_.front()) return 0.0;
      if (z >= knots_.back()) return 1.0;
      const auto hi = static_cast<std::size_t>(
          std::upper_bound(knots_.begin(), knots_.end(), z) - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (z - knots_[lo]) / (knots_[hi] - knots_[lo]);
      return knot_cdf_[lo] + w * (knot_cdf_[hi] - knot_cdf_[lo]);
    }
  }
  return 0.0;
}

double LocationScaleFamily::survival(double z) const {
  switch (kind_) {
    case Kind::Normal:
      return static_cast<double>(normal_cdf(-static_cast<long double>(z)));
    case Kind::Logistic:
      return static_cast<double>(1.0L / (1.0L + std::exp(static_cast<long double>(z))));
    case Kind::Tabulated:
      return 1.0 - cdf(z);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// RiskCriterion

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::Neutral: return "neutral";
    case CriterionKind::LinearRA: return "linear";
    case CriterionKind::QuadraticRA: return "quadratic";
    case CriterionKind::SafetyFirst: return "safety_first";
  }
  return "unknown";
}

CriterionKind criterion_kind_from_string(std::string_view name) {
  for (auto kind : {CriterionKind::Neutral, CriterionKind::LinearRA, CriterionKind::QuadraticRA,
                    CriterionKind::SafetyFirst}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown criterion '" + std::string(name) + "'");
}

RiskCriterion RiskCriterion::safety_first(double y_star, LocationScaleFamily family) {
  if (!std::isfinite(y_star)) throw Error(ErrorCode::NonFiniteValue, "y_star must be finite");
  RiskCriterion c(CriterionKind::SafetyFirst);
  c.y_star_ = y_star;
  c.family_ = std::move(family);
  return c;
}

RiskCriterion RiskCriterion::make(CriterionKind kind, double y_star, LocationScaleFamily family) {
  if (kind == CriterionKind::SafetyFirst) return safety_first(y_star, std::move(family));
  return RiskCriterion(kind);
}

// ---------------------------------------------------------------------------
// PolicyAssignment

std::string_view to_string(AssignmentSource source) {
  switch (source) {
    case AssignmentSource::Actual: return "actual";
    case AssignmentSource::Optimal: return "optimal";
    case AssignmentSource::Oracle: return "oracle";
  }
  return "unknown";
}

void check_membership(const PolicyAssignment& assignment, const ActionSet& action_set) {
  for (std::size_t i = 0; i < assignment.actions.size(); ++i) {
    if (!action_set.contains(assignment.actions[i])) {
      throw Error(ErrorCode::UnknownAction, "assignment entry " + std::to_string(i) + " is " +
                                                std::to_string(assignment.actions[i]));
    }
  }
}

}  // namespace safefirst
