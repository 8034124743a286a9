#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "safefirst/core.hpp"
#include "safefirst/rng.hpp"

namespace safefirst {

/// Two-arm Gaussian design: Y0 ~ N(mu0, sigma0^2), Y1 ~ N(mu1, sigma1^2),
/// drawn independently for each of n units.
struct TwoArmParams {
  double mu0 = 30.0;
  double mu1 = 75.0;
  double sigma0 = 10.0;
  double sigma1 = 65.0;
  std::size_t n = 100;
  std::uint64_t seed = 20251019;

  /// Throws InvalidArgument unless sigmas > 0, n >= 1 and all values finite.
  void validate() const;

  bool operator==(const TwoArmParams&) const = default;
};

struct TwoArmSample {
  std::vector<double> y0;
  std::vector<double> y1;

  bool operator==(const TwoArmSample&) const = default;
};

/// Draws from the stream seeded by params.seed. For each unit, the Y0
/// variate is drawn before the Y1 variate.
TwoArmSample draw_two_arm(const TwoArmParams& params);
TwoArmSample draw_two_arm(const TwoArmParams& params, Xoshiro256& rng);

/// Treat iff y1 > y0 (strict).
PolicyAssignment oracle_assignment(const TwoArmSample& sample);

/// y1 where treated, y0 otherwise. Errors: LengthMismatch, NonBinaryAction.
std::vector<double> realized_outcomes(const TwoArmSample& sample, const PolicyAssignment& assignment);

/// Risk-neutral rule: treat everyone iff mu1 > mu0.
bool risk_neutral_treats(const TwoArmParams& params);
/// Linear risk-averse rule: treat everyone iff mu1/sigma1 > mu0/sigma0.
bool risk_averse_treats(const TwoArmParams& params);

/// E[max(Y0, Y1)] = mu1 Phi(d) + mu0 Phi(-d) + theta phi(d) with
/// theta = sqrt(sigma0^2 + sigma1^2) and d = (mu1 - mu0)/theta.
double closed_form_oracle_welfare(const TwoArmParams& params);

struct ReplicationResult {
  double welfare_rn = 0.0;
  double welfare_ra = 0.0;
  double welfare_oracle = 0.0;
  double oracle_treated_share = 0.0;
  /// Treated units whose Y1 fell below mu1 (the bad-draw scenario).
  std::size_t rn_treated_below_mean = 0;
  std::size_t oracle_treated_below_mean = 0;

  bool operator==(const ReplicationResult&) const = default;
};

struct PolicyWelfare {
  double mean = 0.0;
  double standard_error = 0.0;

  bool operator==(const PolicyWelfare&) const = default;
};

struct MonteCarloSummary {
  TwoArmParams params;
  std::size_t reps = 0;
  bool rn_treats = false;
  bool ra_treats = false;
  PolicyWelfare rn;
  PolicyWelfare ra;
  PolicyWelfare oracle;
  double closed_form_oracle_welfare = 0.0;
  double closed_form_rn_welfare = 0.0;
  double closed_form_ra_welfare = 0.0;
  std::vector<ReplicationResult> replications;

  bool operator==(const MonteCarloSummary&) const = default;
};

/// One replication on the substream (params.seed, index).
ReplicationResult run_replication(const TwoArmParams& params, std::uint64_t index);

/// Replications run in parallel (OpenMP); each owns its substream and the
/// aggregates use pairwise summation, so the summary is bitwise identical
/// for any thread count. Requires reps >= 1.
MonteCarloSummary run_simulation(const TwoArmParams& params, std::size_t reps);

namespace reference {

MonteCarloSummary run_simulation(const TwoArmParams& params, std::size_t reps);

}  // namespace reference

}  // namespace safefirst
