#include <doctest.h>

#include <omp.h>

#include "safefirst/evaluate.hpp"
#include "safefirst/policy.hpp"
#include "safefirst/rng.hpp"
#include "safefirst/simulate.hpp"

using namespace safefirst;

namespace {

Dataset make_data(std::size_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  RawDataset raw;
  raw.num_features = 3;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal();
    raw.features.insert(raw.features.end(), {x, rng.normal(), rng.uniform_open()});
    const auto a = static_cast<Action>(i % 3);
    raw.actions.push_back(a);
    raw.outcomes.push_back(x * (a + 1) + (1.0 + a) * rng.normal());
  }
  return validate_dataset(raw, ActionSet(3));
}

const int kThreadCounts[] = {1, 2, 3, 8};

}  // namespace

TEST_CASE("parallel kernels match the serial reference for any thread count") {
  const auto data = make_data(3000, 41);
  for (auto method : {RegressionMethod::LeastSquares, RegressionMethod::KNearest}) {
    RegressorConfig config;
    config.method = method;
    const auto model = fit_moments(data, config);
    const auto expected_table = reference::predict_table(model, data);
    for (int threads : kThreadCounts) {
      CAPTURE(threads);
      omp_set_num_threads(threads);
      const auto table = predict_table(model, data);
      for (std::size_t i = 0; i < data.size(); ++i) {
        for (Action a = 0; a < 3; ++a) REQUIRE(table.at(i, a) == expected_table.at(i, a));
      }
      for (auto kind : {CriterionKind::Neutral, CriterionKind::LinearRA, CriterionKind::QuadraticRA,
                        CriterionKind::SafetyFirst}) {
        const auto criterion = RiskCriterion::make(kind, 0.5);
        const auto policy = assign_policy(table, criterion);
        CHECK(policy == reference::assign_policy(expected_table, criterion));
        CHECK(value_direct(table, policy, criterion) ==
              reference::value_direct(expected_table, policy, criterion));
      }
    }
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("simulation summary is independent of the thread count") {
  TwoArmParams params;
  const auto expected = reference::run_simulation(params, 300);
  for (int threads : kThreadCounts) {
    CAPTURE(threads);
    omp_set_num_threads(threads);
    CHECK(run_simulation(params, 300) == expected);
  }
  omp_set_num_threads(omp_get_num_procs());
}
