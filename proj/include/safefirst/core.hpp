#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safefirst/error.hpp"

namespace safefirst {

/// Two criterion scores closer than this are treated as tied; ties go to the
/// smallest action label.
inline constexpr double kTieEpsilon = 1e-12;

/// Lower bound on conditional variances, in squared outcome units.
inline constexpr double kVarianceFloor = 1e-12;

using Action = int;

/// Contiguous treatment labels {0, 1, ..., M-1} with M >= 2.
class ActionSet {
 public:
  explicit ActionSet(int size);

  int size() const noexcept { return size_; }
  bool contains(long long label) const noexcept { return label >= 0 && label < size_; }
  std::vector<Action> labels() const;

  bool operator==(const ActionSet&) const = default;

 private:
  int size_;
};

/// Unvalidated observational data as it comes out of a loader.
/// `features` is row-major with `num_features` columns.
struct RawDataset {
  std::vector<double> outcomes;
  std::vector<long long> actions;
  std::vector<double> features;
  std::size_t num_features = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> unit_ids;
};

class Dataset;

Dataset validate_dataset(const RawDataset& raw, const ActionSet& action_set);
Dataset validate_dataset(const Dataset& data);

/// Validated observational data. Immutable once constructed; rows keep the
/// order they were supplied in.
class Dataset {
 public:
  std::size_t size() const noexcept { return outcomes_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  const ActionSet& action_set() const noexcept { return action_set_; }

  std::span<const double> outcomes() const noexcept { return outcomes_; }
  std::span<const Action> actions() const noexcept { return actions_; }
  std::span<const double> features(std::size_t row) const {
    return std::span<const double>(features_).subspan(row * num_features_, num_features_);
  }
  std::span<const double> feature_matrix() const noexcept { return features_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& unit_ids() const noexcept { return unit_ids_; }

  /// Row indices with the given realized action, in row order.
  std::vector<std::size_t> cell(Action a) const;

  RawDataset to_raw() const;

  bool operator==(const Dataset&) const = default;

 private:
  friend Dataset validate_dataset(const RawDataset&, const ActionSet&);

  explicit Dataset(ActionSet action_set) : action_set_(action_set) {}

  ActionSet action_set_;
  std::vector<double> outcomes_;
  std::vector<Action> actions_;
  std::vector<double> features_;
  std::size_t num_features_ = 0;
  std::vector<std::string> feature_names_;
  std::vector<std::string> unit_ids_;
};

/// Estimated (mu, sigma) pair for one unit under one action.
struct ConditionalMoments {
  Action action = 0;
  double mu = 0.0;
  double sigma = 1.0;
  bool floored = false;

  bool operator==(const ConditionalMoments&) const = default;
};

/// Error distribution of a location-scale outcome model Y = mu + sigma * eps.
class LocationScaleFamily {
 public:
  static LocationScaleFamily normal();
  static LocationScaleFamily logistic();
  /// Piecewise-linear CDF through (z[i], cdf[i]); 0 below the first knot and
  /// 1 above the last. Knots must be strictly increasing, the CDF values
  /// non-decreasing, starting within 1e-9 of 0 and ending within 1e-9 of 1.
  static LocationScaleFamily tabulated(std::string name, std::vector<double> z,
                                       std::vector<double> cdf);
  /// "normal" or "logistic".
  static LocationScaleFamily from_name(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  bool is_tabulated() const noexcept { return kind_ == Kind::Tabulated; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& knot_cdf() const noexcept { return knot_cdf_; }

  double cdf(double z) const;
  /// 1 - F(z), evaluated without cancellation for the built-in families.
  double survival(double z) const;

  bool operator==(const LocationScaleFamily&) const = default;

 private:
  enum class Kind { Normal, Logistic, Tabulated };

  LocationScaleFamily(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<double> knots_;
  std::vector<double> knot_cdf_;
};

enum class CriterionKind { Neutral, LinearRA, QuadraticRA, SafetyFirst };

std::string_view to_string(CriterionKind kind);
/// Accepts "neutral", "linear", "quadratic", "safety_first".
CriterionKind criterion_kind_from_string(std::string_view name);

class RiskCriterion {
 public:
  static RiskCriterion neutral() { return RiskCriterion(CriterionKind::Neutral); }
  static RiskCriterion linear() { return RiskCriterion(CriterionKind::LinearRA); }
  static RiskCriterion quadratic() { return RiskCriterion(CriterionKind::QuadraticRA); }
  static RiskCriterion safety_first(double y_star = 0.0,
                                    LocationScaleFamily family = LocationScaleFamily::normal());
  /// Builds any kind; `y_star` and `family` are ignored unless kind is SafetyFirst.
  static RiskCriterion make(CriterionKind kind, double y_star = 0.0,
                            LocationScaleFamily family = LocationScaleFamily::normal());

  CriterionKind kind() const noexcept { return kind_; }
  double y_star() const noexcept { return y_star_; }
  const std::optional<LocationScaleFamily>& family() const noexcept { return family_; }

  bool operator==(const RiskCriterion&) const = default;

 private:
  explicit RiskCriterion(CriterionKind kind) : kind_(kind) {}

  CriterionKind kind_;
  double y_star_ = 0.0;
  std::optional<LocationScaleFamily> family_;
};

enum class AssignmentSource { Actual, Optimal, Oracle };

std::string_view to_string(AssignmentSource source);

struct TieEvent {
  std::size_t unit = 0;
  std::vector<Action> tied;

  bool operator==(const TieEvent&) const = default;
};

struct PolicyAssignment {
  std::vector<Action> actions;
  RiskCriterion criterion = RiskCriterion::neutral();
  std::vector<TieEvent> ties;
  AssignmentSource source = AssignmentSource::Optimal;

  std::size_t size() const noexcept { return actions.size(); }
  bool operator==(const PolicyAssignment&) const = default;
};

/// Throws UnknownAction if any entry falls outside the action set.
void check_membership(const PolicyAssignment& assignment, const ActionSet& action_set);

}  // namespace safefirst
