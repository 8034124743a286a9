#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numeric or scoring code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

/// Standard normal CDF by composite Simpson quadrature of the density on
/// [0, |z|] in long double, step <= 1e-3. Abs. error well below 1e-12.
inline long double normal_cdf_by_quadrature(long double z) {
  const long double a = std::min(std::fabs(z), 40.0L);
  if (a == 0.0L) return 0.5L;
  const auto panels = static_cast<std::size_t>(std::ceil(a / 1e-3L));
  const std::size_t m = 2 * panels;
  const long double h = a / static_cast<long double>(m);
  auto f = [](long double t) {
    return std::exp(-0.5L * t * t) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
  };
  long double s = f(0.0L) + f(a);
  for (std::size_t k = 1; k < m; ++k) s += (k % 2 == 1 ? 4.0L : 2.0L) * f(h * static_cast<long double>(k));
  const long double half_mass = s * h / 3.0L;
  return z > 0 ? 0.5L + half_mass : 0.5L - half_mass;
}

/// E[max(Y0, Y1)] for independent normals by tensor Simpson quadrature over
/// +-10 standard deviations on each axis.
inline double expected_max_by_quadrature(double mu0, double s0, double mu1, double s1,
                                         std::size_t half_panels = 600) {
  const std::size_t m = 2 * half_panels;
  auto weights = [m]() {
    std::vector<double> w(m + 1);
    for (std::size_t k = 0; k <= m; ++k) w[k] = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    return w;
  }();
  const double h0 = 20.0 * s0 / static_cast<double>(m);
  const double h1 = 20.0 * s1 / static_cast<double>(m);
  auto pdf = [](double x, double mu, double s) {
    const double z = (x - mu) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
  };
  long double total = 0.0L;
  for (std::size_t i = 0; i <= m; ++i) {
    const double a = mu0 - 10.0 * s0 + h0 * static_cast<double>(i);
    const double fa = pdf(a, mu0, s0) * weights[i];
    for (std::size_t j = 0; j <= m; ++j) {
      const double b = mu1 - 10.0 * s1 + h1 * static_cast<double>(j);
      total += static_cast<long double>(std::max(a, b) * fa * pdf(b, mu1, s1) * weights[j]);
    }
  }
  return static_cast<double>(total * h0 * h1 / 9.0L);
}

struct Moment {
  double mu;
  double sigma;
};

enum class Kind { Neutral, Linear, Quadratic, SafetyNormal, SafetyLogistic };

/// Per-unit criterion utility written out directly from the definitions.
inline double utility(Kind kind, Moment m, double y_star = 0.0) {
  switch (kind) {
    case Kind::Neutral: return m.mu;
    case Kind::Linear: return m.mu / m.sigma;
    case Kind::Quadratic: return m.mu / (m.sigma * m.sigma);
    case Kind::SafetyNormal:
      return 0.5 * std::erfc((y_star - m.mu) / (m.sigma * std::numbers::sqrt2));
    case Kind::SafetyLogistic: return 1.0 / (1.0 + std::exp((y_star - m.mu) / m.sigma));
  }
  return 0.0;
}

/// Maximum of the mean utility over all M^n deterministic assignments.
/// moments[i][a] is unit i under action a.
inline double best_value_by_enumeration(const std::vector<std::vector<Moment>>& moments, Kind kind,
                                        double y_star = 0.0) {
  const std::size_t n = moments.size();
  const std::size_t M = moments.front().size();
  std::vector<std::size_t> choice(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += utility(kind, moments[i][choice[i]], y_star);
    best = std::max(best, total / static_cast<double>(n));
    std::size_t pos = 0;
    while (pos < n && ++choice[pos] == M) choice[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

/// Population-style variance by the two-pass formula.
inline double two_pass_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace oracle
