#include "safefirst/simulate.hpp"

#include <cmath>

#include "safefirst/numeric.hpp"

namespace safefirst {

void TwoArmParams::validate() const {
  if (!std::isfinite(mu0) || !std::isfinite(mu1)) {
    throw Error(ErrorCode::InvalidArgument, "arm means must be finite");
  }
  if (!(sigma0 > 0.0) || !(sigma1 > 0.0) || !std::isfinite(sigma0) || !std::isfinite(sigma1)) {
    throw Error(ErrorCode::InvalidArgument, "arm standard deviations must be positive");
  }
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
}

TwoArmSample draw_two_arm(const TwoArmParams& params, Xoshiro256& rng) {
  params.validate();
  TwoArmSample s;
  s.y0.resize(params.n);
  s.y1.resize(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    s.y0[i] = params.mu0 + params.sigma0 * rng.normal();
    s.y1[i] = params.mu1 + params.sigma1 * rng.normal();
  }
  return s;
}

TwoArmSample draw_two_arm(const TwoArmParams& params) {
  Xoshiro256 rng(params.seed);
  return draw_two_arm(params, rng);
}

PolicyAssignment oracle_assignment(const TwoArmSample& sample) {
  if (sample.y0.size() != sample.y1.size()) {
    throw Error(ErrorCode::LengthMismatch, "y0 and y1 differ in length");
  }
  PolicyAssignment out;
  out.source = AssignmentSource::Oracle;
  out.criterion = RiskCriterion::neutral();
  out.actions.resize(sample.y0.size());
  for (std::size_t i = 0; i < sample.y0.size(); ++i) {
    out.actions[i] = sample.y1[i] > sample.y0[i] ? 1 : 0;
  }
  return out;
}

std::vector<double> realized_outcomes(const TwoArmSample& sample, const PolicyAssignment& assignment) {
  if (sample.y0.size() != sample.y1.size() || assignment.size() != sample.y0.size()) {
    throw Error(ErrorCode::LengthMismatch, "sample and assignment differ in length");
  }
  std::vector<double> out(assignment.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Action a = assignment.actions[i];
    if (a != 0 && a != 1) {
      throw Error(ErrorCode::NonBinaryAction, "action " + std::to_string(a) + " at unit " +
                                                  std::to_string(i));
    }
    out[i] = a == 1 ? sample.y1[i] : sample.y0[i];
  }
  return out;
}

bool risk_neutral_treats(const TwoArmParams& params) { return params.mu1 > params.mu0; }

bool risk_averse_treats(const TwoArmParams& params) {
  return params.mu1 / params.sigma1 > params.mu0 / params.sigma0;
}

double closed_form_oracle_welfare(const TwoArmParams& params) {
  params.validate();
  const long double theta = std::hypot(static_cast<long double>(params.sigma0),
                                       static_cast<long double>(params.sigma1));
  const long double d = (static_cast<long double>(params.mu1) - params.mu0) / theta;
  return static_cast<double>(params.mu1 * normal_cdf(d) + params.mu0 * normal_cdf(-d) +
                             theta * normal_pdf(d));
}

namespace {

PolicyAssignment constant_assignment(std::size_t n, bool treat, const RiskCriterion& criterion) {
  PolicyAssignment out;
  out.actions.assign(n, treat ? 1 : 0);
  out.criterion = criterion;
  out.source = AssignmentSource::Optimal;
  return out;
}

std::size_t treated_below_mean(const TwoArmSample& sample, const PolicyAssignment& assignment,
                               double mu1) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment.actions[i] == 1 && sample.y1[i] < mu1) ++count;
  }
  return count;
}

PolicyWelfare aggregate(const std::vector<ReplicationResult>& reps,
                        double ReplicationResult::*field) {
  std::vector<double> values(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) values[r] = reps[r].*field;
  PolicyWelfare w;
  w.mean = pairwise_mean(values);
  if (values.size() > 1) {
    for (double& v : values) v = (v - w.mean) * (v - w.mean);
    const double var = pairwise_sum(values) / static_cast<double>(values.size() - 1);
    w.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return w;
}

MonteCarloSummary summarize(const TwoArmParams& params, std::vector<ReplicationResult> reps) {
  MonteCarloSummary s;
  s.params = params;
  s.reps = reps.size();
  s.rn_treats = risk_neutral_treats(params);
  s.ra_treats = risk_averse_treats(params);
  s.rn = aggregate(reps, &ReplicationResult::welfare_rn);
  s.ra = aggregate(reps, &ReplicationResult::welfare_ra);
  s.oracle = aggregate(reps, &ReplicationResult::welfare_oracle);
  s.closed_form_oracle_welfare = closed_form_oracle_welfare(params);
  s.closed_form_rn_welfare = s.rn_treats ? params.mu1 : params.mu0;
  s.closed_form_ra_welfare = s.ra_treats ? params.mu1 : params.mu0;
  s.replications = std::move(reps);
  return s;
}

void check_reps(const TwoArmParams& params, std::size_t reps) {
  params.validate();
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
}

}  // namespace

ReplicationResult run_replication(const TwoArmParams& params, std::uint64_t index) {
  auto rng = Xoshiro256::substream(params.seed, index);
  const auto sample = draw_two_arm(params, rng);
  const auto rn = constant_assignment(params.n, risk_neutral_treats(params), RiskCriterion::neutral());
  const auto ra = constant_assignment(params.n, risk_averse_treats(params), RiskCriterion::linear());
  const auto oracle = oracle_assignment(sample);

  ReplicationResult r;
  r.welfare_rn = pairwise_mean(realized_outcomes(sample, rn));
  r.welfare_ra = pairwise_mean(realized_outcomes(sample, ra));
  r.welfare_oracle = pairwise_mean(realized_outcomes(sample, oracle));
  std::size_t treated = 0;
  for (Action a : oracle.actions) treated += static_cast<std::size_t>(a);
  r.oracle_treated_share = static_cast<double>(treated) / static_cast<double>(params.n);
  r.rn_treated_below_mean = treated_below_mean(sample, rn, params.mu1);
  r.oracle_treated_below_mean = treated_below_mean(sample, oracle, params.mu1);
  return r;
}

MonteCarloSummary run_simulation(const TwoArmParams& params, std::size_t reps) {
  check_reps(params, reps);
  std::vector<ReplicationResult> results(reps);
  const auto count = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    results[static_cast<std::size_t>(r)] = run_replication(params, static_cast<std::uint64_t>(r));
  }
  return summarize(params, std::move(results));
}

namespace reference {

MonteCarloSummary run_simulation(const TwoArmParams& params, std::size_t reps) {
  check_reps(params, reps);
  std::vector<ReplicationResult> results;
  results.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) results.push_back(run_replication(params, r));
  return summarize(params, std::move(results));
}

}  // namespace reference

}  // namespace safefirst
