// Serial reference vs OpenMP kernels. Usage: bench_kernels [n_units] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "safefirst/evaluate.hpp"
#include "safefirst/policy.hpp"
#include "safefirst/rng.hpp"
#include "safefirst/simulate.hpp"

using namespace safefirst;

namespace {

template <class F>
double best_of(int trials, F&& f) {
  double best = 1e300;
  for (int t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-16s %10.4f %10.4f %8.2fx  %s\n", name, serial * 1e3, parallel * 1e3, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 200000;
  const std::size_t reps = argc > 2 ? std::stoul(argv[2]) : 20000;

  Xoshiro256 rng(2024);
  RawDataset raw;
  raw.num_features = 5;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double x = rng.normal();
      raw.features.push_back(x);
      s += x;
    }
    const auto a = static_cast<Action>(i % 3);
    raw.actions.push_back(a);
    raw.outcomes.push_back(1.0 + 0.3 * a * s + (1.0 + a) * rng.normal());
  }
  const auto data = validate_dataset(raw, ActionSet(3));
  RegressorConfig ls;
  const auto model = fit_moments(data, ls);
  const auto criterion = RiskCriterion::safety_first(0.5);

  std::printf("n = %zu units, %zu replications, %d threads\n", n, reps, omp_get_max_threads());
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  MomentTable t_serial = reference::predict_table(model, data);
  MomentTable t_omp = t_serial;
  const double pt_s = best_of(3, [&] { t_serial = reference::predict_table(model, data); });
  const double pt_p = best_of(3, [&] { t_omp = predict_table(model, data); });
  bool same = true;
  for (std::size_t i = 0; i < n && same; ++i) {
    for (Action a = 0; a < 3; ++a) same = same && t_serial.at(i, a) == t_omp.at(i, a);
  }
  row("predict_table", pt_s, pt_p, same);

  PolicyAssignment p_serial, p_omp;
  const double ap_s = best_of(5, [&] { p_serial = reference::assign_policy(t_serial, criterion); });
  const double ap_p = best_of(5, [&] { p_omp = assign_policy(t_omp, criterion); });
  row("assign_policy", ap_s, ap_p, p_serial == p_omp);

  double v_serial = 0.0, v_omp = 0.0;
  const double vd_s = best_of(5, [&] { v_serial = reference::value_direct(t_serial, p_serial, criterion); });
  const double vd_p = best_of(5, [&] { v_omp = value_direct(t_omp, p_omp, criterion); });
  row("value_direct", vd_s, vd_p, v_serial == v_omp);

  TwoArmParams params;
  MonteCarloSummary s_serial, s_omp;
  const double rs_s = best_of(2, [&] { s_serial = reference::run_simulation(params, reps); });
  const double rs_p = best_of(2, [&] { s_omp = run_simulation(params, reps); });
  row("run_simulation", rs_s, rs_p, s_serial == s_omp);
  return 0;
}
