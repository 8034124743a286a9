#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "safefirst/evaluate.hpp"
#include "safefirst/rng.hpp"

using namespace safefirst;

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

const std::vector<ConditionalMoments> kTwoArm = {{0, 30.0, 10.0, false}, {1, 75.0, 65.0, false}};

PolicyAssignment fixed(std::vector<Action> actions, RiskCriterion c = RiskCriterion::neutral()) {
  PolicyAssignment p;
  p.actions = std::move(actions);
  p.criterion = c;
  return p;
}

}  // namespace

TEST_CASE("direct value examples") {
  const auto table = MomentTable::homogeneous(4, kTwoArm);
  CHECK(value_direct(table, fixed({1, 1, 1, 1}), RiskCriterion::neutral()) == 75.0);
  CHECK(value_direct(table, fixed({0, 0, 0, 0}), RiskCriterion::linear()) == 3.0);
  const auto two = MomentTable::homogeneous(2, kTwoArm);
  CHECK(value_direct(two, fixed({0, 1}), RiskCriterion::neutral()) == 52.5);
  CHECK(code_of([&] { value_direct(two, fixed({0, 1, 1}), RiskCriterion::neutral()); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { value_direct(two, fixed({0, 2}), RiskCriterion::neutral()); }) ==
        ErrorCode::UnknownAction);
}

TEST_CASE("empirical safety-first welfare") {
  const std::vector<double> y = {1.0, 2.0, 3.0};
  CHECK(safety_first_welfare_empirical(y, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(safety_first_welfare_empirical(y, -5.0) == 1.0);
  CHECK(safety_first_welfare_empirical(y, 5.0) == 0.0);
  CHECK_THROWS_AS(safety_first_welfare_empirical(std::vector<double>{}, 0.0), Error);
}

TEST_CASE("regret examples") {
  CHECK(regret(13.63, 11.16) == doctest::Approx(2.47).epsilon(1e-12));
  CHECK(regret(4.2, 4.2) == 0.0);
  const auto table = MomentTable::homogeneous(3, kTwoArm);
  const double fb = value_direct(table, fixed({1, 1, 1}), RiskCriterion::neutral());
  const double alt = value_direct(table, fixed({0, 0, 0}), RiskCriterion::neutral());
  CHECK(regret(fb, alt) == 45.0);
}

TEST_CASE("match rate") {
  CHECK(match_rate(fixed({0, 1, 2}), fixed({0, 2, 2})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(match_rate(fixed({0, 1}), fixed({0, 1})) == 1.0);
  CHECK(match_rate(fixed({0, 1}), fixed({1, 0})) == 0.0);
  CHECK(code_of([] { match_rate(fixed({0}), fixed({0, 1})); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("action frequencies") {
  const auto f = action_frequencies(fixed({0, 0, 0, 1, 1, 1, 2, 2, 2}), ActionSet(3));
  REQUIRE(f.rows.size() == 3);
  for (const auto& r : f.rows) {
    CHECK(r.count == 3);
    CHECK(r.percent == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  }
  CHECK(f.total == 9);
  CHECK(f.total_percent == doctest::Approx(100.0));

  const auto zeros = action_frequencies(fixed({0, 0, 0, 0}), ActionSet(3));
  CHECK(zeros.rows[0].count == 4);
  CHECK(zeros.rows[1].count == 0);
  CHECK(zeros.rows[2].count == 0);
  CHECK(code_of([] { action_frequencies(fixed({0, 3}), ActionSet(3)); }) == ErrorCode::UnknownAction);
}

TEST_CASE("policy return variance") {
  const auto table = MomentTable::homogeneous(2, kTwoArm);
  // mean sigma^2 = (100 + 4225)/2, var mu = 22.5^2
  CHECK(policy_return_variance(table, fixed({0, 1})) ==
        doctest::Approx((100.0 + 4225.0) / 2.0 + 22.5 * 22.5).epsilon(1e-14));
  CHECK(policy_return_variance(table, fixed({1, 1})) == doctest::Approx(4225.0).epsilon(1e-14));
}

TEST_CASE("evaluate_criterion on random tables") {
  Xoshiro256 rng(55);
  const std::size_t n = 300;
  std::vector<ConditionalMoments> entries;
  std::vector<Action> realized;
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      entries.push_back({a, rng.normal() + 0.2 * a, 0.3 + rng.uniform_open() * (1.0 + a), a == 2 && i % 50 == 0});
    }
    realized.push_back(static_cast<Action>(rng() % 3));
  }
  MomentTable table(n, ActionSet(3), entries);
  const auto first_best = value_direct(table, assign_policy(table, RiskCriterion::neutral()),
                                       RiskCriterion::neutral());
  for (auto kind : {CriterionKind::Neutral, CriterionKind::LinearRA, CriterionKind::QuadraticRA,
                    CriterionKind::SafetyFirst}) {
    const auto criterion = RiskCriterion::make(kind, 0.1);
    const auto ev = evaluate_criterion(table, realized, criterion);
    CAPTURE(to_string(kind));
    const auto& r = ev.report;
    CHECK(r.criterion == criterion);
    CHECK(r.n_used == n);
    CHECK(ev.actual.actions == realized);
    CHECK(ev.actual.source == AssignmentSource::Actual);
    CHECK(r.value_optimal >= r.value_actual);
    CHECK(r.value_optimal == value_direct(table, ev.optimal, criterion));
    CHECK(r.regret_vs_first_best >= -1e-12);
    CHECK(r.regret_vs_first_best ==
          doctest::Approx(first_best - value_direct(table, ev.optimal, RiskCriterion::neutral())));
    if (kind == CriterionKind::Neutral) CHECK(r.regret_vs_first_best == 0.0);
    CHECK(r.match_rate == match_rate(ev.actual, ev.optimal));
    CHECK(r.action_frequencies.total == n);
    CHECK(r.optimal_action_frequencies == action_frequencies(ev.optimal, ActionSet(3)));
    CHECK(r.tie_count == ev.optimal.ties.size());
    CHECK(r.floored_count == 6);  // every 50th unit, one action each
  }
}

TEST_CASE("direct value agrees with a naive mean") {
  Xoshiro256 rng(2);
  const std::size_t n = 10001;
  std::vector<ConditionalMoments> entries;
  std::vector<Action> actions;
  std::vector<double> expected;
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 2; ++a) entries.push_back({a, rng.normal(), 1.0 + rng.uniform_open(), false});
    actions.push_back(static_cast<Action>(i % 2));
    const auto& m = entries[2 * i + i % 2];
    expected.push_back(oracle::utility(oracle::Kind::Quadratic, {m.mu, m.sigma}));
  }
  MomentTable table(n, ActionSet(2), entries);
  CHECK(std::abs(value_direct(table, fixed(actions), RiskCriterion::quadratic()) - oracle::mean(expected)) <
        1e-12);
}
