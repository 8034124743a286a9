#include "safefirst/moments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace safefirst {

namespace {

struct Standardization {
  std::vector<double> center;
  std::vector<double> scale;
};

// Columns with zero spread keep scale 1 so they standardize to a constant.
Standardization standardization_of(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t p = data.num_features();
  Standardization s{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
  std::vector<double> column(n);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = data.features(i)[j];
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.center[j] = mean;
    if (sd > 0.0 && std::isfinite(sd)) s.scale[j] = sd;
  }
  return s;
}

std::size_t basis_width(std::size_t p, Basis basis) {
  return 1 + (basis == Basis::Linear ? p : 2 * p);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> MomentModel::standardize(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - center_[j]) / scale_[j];
  return z;
}

std::vector<double> MomentModel::basis_row(std::span<const double> z) const {
  std::vector<double> row;
  row.reserve(basis_width(z.size(), config_.basis));
  row.push_back(1.0);
  row.insert(row.end(), z.begin(), z.end());
  if (config_.basis == Basis::LinearPlusSquares) {
    for (double v : z) row.push_back(v * v);
  }
  return row;
}

std::vector<std::size_t> MomentModel::neighbours(const NeighbourFit& fit,
                                                 std::span<const double> z) const {
  const std::size_t m = fit.y.size();
  const std::size_t p = z.size();
  const auto k = static_cast<std::size_t>(config_.knn_k);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  if (k >= m) return idx;

  std::vector<double> dist(m);
  for (std::size_t r = 0; r < m; ++r) {
    double d = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = fit.points[r * p + j] - z[j];
      d += diff * diff;
    }
    dist[r] = d;
  }
  auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double MomentModel::predict_mean(std::span<const double> x, Action t) const {
  const auto a = static_cast<std::size_t>(t);
  const auto z = standardize(x);
  if (config_.method == RegressionMethod::LeastSquares) {
    return dot(basis_row(z), linear_[a].mean_coef);
  }
  const auto& fit = knn_[a];
  double s = 0.0;
  const auto nb = neighbours(fit, z);
  for (std::size_t r : nb) s += fit.y[r];
  return s / static_cast<double>(nb.size());
}

double MomentModel::predict_second_moment(std::span<const double> x, Action t) const {
  const auto a = static_cast<std::size_t>(t);
  const auto z = standardize(x);
  if (config_.method == RegressionMethod::LeastSquares) {
    return dot(basis_row(z), linear_[a].second_coef);
  }
  const auto& fit = knn_[a];
  double s = 0.0;
  const auto nb = neighbours(fit, z);
  for (std::size_t r : nb) s += fit.y2[r];
  return s / static_cast<double>(nb.size());
}

MomentModel fit_moments(const Dataset& data, const RegressorConfig& config, double variance_floor) {
  if (!(variance_floor > 0.0) || !std::isfinite(variance_floor)) {
    throw Error(ErrorCode::InvalidArgument, "variance floor must be positive");
  }
  if (config.ridge_lambda < 0.0 || !std::isfinite(config.ridge_lambda)) {
    throw Error(ErrorCode::InvalidArgument, "ridge_lambda must be non-negative");
  }
  if (config.method == RegressionMethod::KNearest && config.knn_k < 1) {
    throw Error(ErrorCode::InvalidArgument, "knn_k must be positive");
  }

  const ActionSet& actions = data.action_set();
  const std::size_t p = data.num_features();
  const std::size_t needed = config.method == RegressionMethod::KNearest
                                 ? static_cast<std::size_t>(config.knn_k)
                                 : p + 1;

  std::vector<std::vector<std::size_t>> cells;
  for (Action a : actions.labels()) {
    cells.push_back(data.cell(a));
    if (cells.back().size() < needed) {
      throw Error(ErrorCode::InsufficientCellSize,
                  "action " + std::to_string(a) + " has " + std::to_string(cells.back().size()) +
                      " observations, need " + std::to_string(needed));
    }
  }

  MomentModel model(config, actions, variance_floor);
  model.training_n_ = data.size();
  auto standardization = standardization_of(data);
  model.center_ = std::move(standardization.center);
  model.scale_ = std::move(standardization.scale);

  for (std::size_t a = 0; a < cells.size(); ++a) {
    const auto& rows = cells[a];
    if (config.method == RegressionMethod::KNearest) {
      MomentModel::NeighbourFit fit;
      for (std::size_t i : rows) {
        const auto z = model.standardize(data.features(i));
        fit.points.insert(fit.points.end(), z.begin(), z.end());
        const double y = data.outcomes()[i];
        fit.y.push_back(y);
        fit.y2.push_back(y * y);
      }
      model.knn_.push_back(std::move(fit));
      continue;
    }

    const std::size_t width = basis_width(p, config.basis);
    const std::size_t penalized = width - 1;
    const bool ridge = config.ridge_lambda > 0.0;
    const auto m = static_cast<Eigen::Index>(rows.size() + (ridge ? penalized : 0));
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(width));
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(m, 2);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto row = model.basis_row(model.standardize(data.features(rows[r])));
      for (std::size_t c = 0; c < width; ++c) {
        design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
      const double y = data.outcomes()[rows[r]];
      targets(static_cast<Eigen::Index>(r), 0) = y;
      targets(static_cast<Eigen::Index>(r), 1) = y * y;
    }
    if (ridge) {
      const double root = std::sqrt(config.ridge_lambda);
      for (std::size_t c = 1; c < width; ++c) {
        design(static_cast<Eigen::Index>(rows.size() + c - 1), static_cast<Eigen::Index>(c)) = root;
      }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(width)) {
      throw Error(ErrorCode::SingularDesign,
                  "design for action " + std::to_string(a) + " has rank " +
                      std::to_string(qr.rank()) + " < " + std::to_string(width));
    }
    const Eigen::MatrixXd coef = qr.solve(targets);
    if (!coef.allFinite()) {
      throw Error(ErrorCode::SingularDesign, "non-finite coefficients for action " + std::to_string(a));
    }
    MomentModel::LinearFit fit;
    fit.mean_coef.resize(width);
    fit.second_coef.resize(width);
    for (std::size_t c = 0; c < width; ++c) {
      fit.mean_coef[c] = coef(static_cast<Eigen::Index>(c), 0);
      fit.second_coef[c] = coef(static_cast<Eigen::Index>(c), 1);
    }
    model.linear_.push_back(std::move(fit));
  }
  return model;
}

ConditionalMoments predict_moments(const MomentModel& model, std::span<const double> x, Action t) {
  if (!model.action_set().contains(t)) {
    throw Error(ErrorCode::UnknownAction, "action " + std::to_string(t));
  }
  if (x.size() != model.num_features()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.num_features()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  const double mu = model.predict_mean(x, t);
  const double m2 = model.predict_second_moment(x, t);
  const long double raw_var =
      static_cast<long double>(m2) - static_cast<long double>(mu) * static_cast<long double>(mu);

  ConditionalMoments out;
  out.action = t;
  out.mu = mu;
  if (!(raw_var >= static_cast<long double>(model.variance_floor()))) {
    out.sigma = std::sqrt(model.variance_floor());
    out.floored = true;
  } else {
    out.sigma = static_cast<double>(std::sqrt(raw_var));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Propensity

std::vector<double> PropensityModel::predict(std::span<const double> x) const {
  if (x.size() != center.size()) {
    throw Error(ErrorCode::DimensionMismatch, "propensity model expects " +
                                                  std::to_string(center.size()) + " features");
  }
  const std::size_t M = static_cast<std::size_t>(action_set.size());
  std::vector<double> eta(M, 0.0);
  for (std::size_t k = 1; k < M; ++k) {
    const auto& beta = coefficients[k - 1];
    double s = beta[0];
    for (std::size_t j = 0; j < x.size(); ++j) s += beta[j + 1] * (x[j] - center[j]) / scale[j];
    eta[k] = s;
  }
  const double top = *std::max_element(eta.begin(), eta.end());
  double total = 0.0;
  for (double& e : eta) {
    e = std::exp(e - top);
    total += e;
  }
  for (double& e : eta) e /= total;
  return eta;
}

namespace {

struct LogitState {
  double log_lik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd neg_hessian;
};

// Mean log-likelihood, its gradient and negative Hessian for the multinomial
// logit with design rows z (intercept first) and reference action 0.
LogitState logit_state(const Eigen::MatrixXd& z, std::span<const Action> actions,
                       const Eigen::VectorXd& theta, std::size_t num_actions, bool with_hessian) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  const Eigen::Index K = static_cast<Eigen::Index>(num_actions) - 1;
  LogitState s;
  s.gradient = Eigen::VectorXd::Zero(K * d);
  if (with_hessian) s.neg_hessian = Eigen::MatrixXd::Zero(K * d, K * d);

  Eigen::VectorXd eta(K + 1);
  Eigen::VectorXd prob(K + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    eta(0) = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) eta(k + 1) = z.row(i).dot(theta.segment(k * d, d));
    const double top = eta.maxCoeff();
    prob = (eta.array() - top).exp();
    const double total = prob.sum();
    prob /= total;
    const Eigen::Index observed = actions[static_cast<std::size_t>(i)];
    s.log_lik += eta(observed) - top - std::log(total);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double resid = (observed == k + 1 ? 1.0 : 0.0) - prob(k + 1);
      s.gradient.segment(k * d, d) += resid * z.row(i).transpose();
    }
    if (with_hessian) {
      const Eigen::MatrixXd outer = z.row(i).transpose() * z.row(i);
      for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index l = 0; l < K; ++l) {
          const double w = prob(k + 1) * ((k == l ? 1.0 : 0.0) - prob(l + 1));
          s.neg_hessian.block(k * d, l * d, d, d) += w * outer;
        }
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  s.log_lik *= inv_n;
  s.gradient *= inv_n;
  if (with_hessian) s.neg_hessian *= inv_n;
  return s;
}

}  // namespace

PropensityModel fit_propensity(const Dataset& data, const PropensityOptions& options) {
  const std::size_t n = data.size();
  const std::size_t p = data.num_features();
  const std::size_t M = static_cast<std::size_t>(data.action_set().size());
  const auto d = static_cast<Eigen::Index>(p + 1);

  PropensityModel model;
  model.action_set = data.action_set();
  auto standardization = standardization_of(data);
  model.center = std::move(standardization.center);
  model.scale = std::move(standardization.scale);

  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.features(i);
    z(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) =
          (x[j] - model.center[j]) / model.scale[j];
    }
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M - 1) * d);
  LogitState state = logit_state(z, data.actions(), theta, M, true);
  int iter = 0;
  bool diverged = false;
  while (iter < options.max_iterations && state.gradient.norm() >= options.gradient_tolerance) {
    ++iter;
    Eigen::MatrixXd h = state.neg_hessian;
    h.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = h.ldlt().solve(state.gradient);
    double scale = 1.0;
    Eigen::VectorXd candidate = theta + step;
    double candidate_ll = logit_state(z, data.actions(), candidate, M, false).log_lik;
    for (int halvings = 0; halvings < 40 && !(candidate_ll >= state.log_lik); ++halvings) {
      scale *= 0.5;
      candidate = theta + scale * step;
      candidate_ll = logit_state(z, data.actions(), candidate, M, false).log_lik;
    }
    theta = candidate;
    state = logit_state(z, data.actions(), theta, M, true);
    if (theta.cwiseAbs().maxCoeff() > options.coefficient_bound) {
      diverged = true;
      break;
    }
  }

  model.iterations = iter;
  model.gradient_norm = state.gradient.norm();
  model.converged = !diverged && model.gradient_norm < options.gradient_tolerance;
  model.coefficients.assign(M - 1, std::vector<double>(p + 1));
  for (std::size_t k = 0; k + 1 < M; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      model.coefficients[k][static_cast<std::size_t>(j)] = theta(static_cast<Eigen::Index>(k) * d + j);
    }
  }
  return model;
}

namespace {

double quantile_type1(const std::vector<double>& sorted, double prob) {
  const std::size_t n = sorted.size();
  const auto rank = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n)));
  return sorted[rank == 0 ? 0 : std::min(rank, n) - 1];
}

}  // namespace

OverlapDiagnostics overlap_report(const PropensityModel& model, const Dataset& data,
                                  double threshold) {
  const int M = model.action_set.size();
  if (!(threshold > 0.0 && threshold < 1.0 / M)) {
    throw Error(ErrorCode::InvalidArgument,
                "overlap threshold must lie in (0, 1/" + std::to_string(M) + ")");
  }
  const std::size_t n = data.size();
  std::vector<std::vector<double>> by_action(static_cast<std::size_t>(M));
  OverlapDiagnostics out;
  out.threshold = threshold;
  out.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto probs = model.predict(data.features(i));
    bool violated = false;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      by_action[a].push_back(probs[a]);
      violated = violated || probs[a] < threshold;
    }
    if (violated) ++out.violation_count;
  }
  for (auto& values : by_action) {
    std::sort(values.begin(), values.end());
    out.per_action.push_back({values.front(), quantile_type1(values, 0.05),
                              quantile_type1(values, 0.25), quantile_type1(values, 0.5),
                              quantile_type1(values, 0.75), quantile_type1(values, 0.95),
                              values.back()});
  }
  return out;
}

}  // namespace safefirst
