// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prn/mlp.hpp"  // sigmoid
#include "prn/rng.hpp"

namespace prn {

namespace {

// glmnet-style floor on the IRLS weights
constexpr double kWorkingProbClamp = 1e-5;

double soft_threshold(double u, double lambda) {
  if (u > lambda) return u - lambda;
  if (u < -lambda) return u + lambda;
  return 0.0;
}

double clamped_mean_logit(const Eigen::VectorXd& targets) {
  const double mean =
      std::clamp(targets.mean(), kWorkingProbClamp, 1.0 - kWorkingProbClamp);
  return std::log(mean / (1.0 - mean));
}

void finalize_selection(LassoModel& model) {
  model.selected.clear();
  for (Eigen::Index t = 0; t < model.coefficients.size(); ++t)
    if (model.coefficients[t] != 0.0) model.selected.push_back(t);
}

double deviance(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                double intercept, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = (design * beta).array() + intercept;
  double nll = 0.0;
  for (Eigen::Index m = 0; m < eta.size(); ++m) {
    // log(1 + e^eta) - t*eta, computed stably
    const double e = eta[m];
    nll += (e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) -
           targets[m] * e;
  }
  return nll;
}

}  // namespace

double lambda_max(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) {
  const double mean = targets.mean();
  const Eigen::VectorXd centered = targets.array() - mean;
  return (design.transpose() * centered).cwiseAbs().maxCoeff();
}

LassoModel fit_lasso(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                     double lambda, const LassoConfig& config,
                     const LassoModel* warm) {
  if (lambda < 0.0) throw std::invalid_argument("lasso: lambda must be >= 0");
  if (!design.allFinite()) throw std::invalid_argument("lasso: non-finite design");
  if (design.rows() != targets.size())
    throw std::invalid_argument("lasso: design/target row mismatch");
  const Eigen::Index n = design.rows();
  const Eigen::Index T = design.cols();

  LassoModel model;
  model.lambda = lambda;
  if (warm && warm->coefficients.size() == T) {
    model.intercept = warm->intercept;
    model.coefficients = warm->coefficients;
  } else {
    model.intercept = clamped_mean_logit(targets);
    model.coefficients = Eigen::VectorXd::Zero(T);
  }

  Eigen::VectorXd eta = (design * model.coefficients).array() + model.intercept;
  Eigen::VectorXd weights(n), residual(n);

  for (int irls = 0; irls < config.max_irls_iterations; ++irls) {
    // Working quadratic at the current eta.
    for (Eigen::Index m = 0; m < n; ++m) {
      const double p = std::clamp(sigmoid(eta[m]), kWorkingProbClamp,
                                  1.0 - kWorkingProbClamp);
      weights[m] = p * (1.0 - p);
      // residual of the working response z = eta + (t - p)/w around eta
      residual[m] = (targets[m] - p) / weights[m];
    }
    const Eigen::VectorXd col_curvature =
        (design.array().square().colwise() * weights.array()).colwise().sum();
    const double weight_sum = weights.sum();

    // Coordinate descent with active-set cycling: iterate the nonzero set
    // until stable, then confirm with a full sweep that may admit new
    // coordinates; converged only when a full sweep changes nothing.
    double outer_change = 0.0;
    bool full_pass = true;
    for (int sweep = 0; sweep < config.max_cd_sweeps; ++sweep) {
      double sweep_change = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) {
        const double old = model.coefficients[t];
        if (!full_pass && old == 0.0) continue;
        const double gradient_part =
            (design.col(t).array() * weights.array() * residual.array()).sum();
        const double u = gradient_part + col_curvature[t] * old;
        // tiny relative slack so a coordinate exactly on the KKT boundary
        // (lambda == lambda_max) lands on zero instead of rounding noise
        const double updated =
            std::abs(u) <= lambda * (1.0 + 1e-10)
                ? 0.0
                : soft_threshold(u, lambda) / col_curvature[t];
        if (updated != old) {
          residual -= design.col(t) * (updated - old);
          model.coefficients[t] = updated;
          sweep_change = std::max(sweep_change, std::abs(updated - old));
        }
      }
      const double intercept_step =
          (weights.array() * residual.array()).sum() / weight_sum;
      if (intercept_step != 0.0) {
        model.intercept += intercept_step;
        residual.array() -= intercept_step;
        sweep_change = std::max(sweep_change, std::abs(intercept_step));
      }
      outer_change = std::max(outer_change, sweep_change);
      if (sweep_change < config.coefficient_tolerance) {
        if (full_pass) break;
        full_pass = true;  // verify the restricted solution over all coords
      } else {
        full_pass = false;
      }
    }

    eta = (design * model.coefficients).array() + model.intercept;
    if (outer_change < config.coefficient_tolerance) break;
    if (irls == config.max_irls_iterations - 1) {
      finalize_selection(model);
      throw std::runtime_error(
          "lasso: no convergence after " + std::to_string(config.max_irls_iterations) +
          " IRLS iterations, residual KKT violation " +
          std::to_string(kkt_violation(design, targets, model)));
    }
  }

  finalize_selection(model);
  return model;
}

double kkt_violation(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                     const LassoModel& model) {
  const Eigen::VectorXd eta =
      (design * model.coefficients).array() + model.intercept;
  Eigen::VectorXd diff(eta.size());
  for (Eigen::Index m = 0; m < eta.size(); ++m)
    diff[m] = sigmoid(eta[m]) - targets[m];
  const Eigen::VectorXd score = design.transpose() * diff;

  double violation = std::abs(diff.sum());  // intercept stationarity
  for (Eigen::Index t = 0; t < model.coefficients.size(); ++t) {
    if (model.coefficients[t] == 0.0)
      violation = std::max(violation, std::abs(score[t]) - model.lambda);
    else
      violation = std::max(
          violation,
          std::abs(score[t] + model.lambda * (model.coefficients[t] > 0 ? 1.0 : -1.0)));
  }
  return violation;
}

double penalized_deviance(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          const LassoModel& model) {
  return deviance(design, targets, model.intercept, model.coefficients) +
         model.lambda * model.coefficients.cwiseAbs().sum();
}

LassoPath path_and_select(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          int folds, std::uint64_t seed, const LassoConfig& config) {
  if (folds < 2) throw std::invalid_argument("lasso: folds must be >= 2");
  const Eigen::Index n = design.rows();

  LassoPath path;
  const double top = lambda_max(design, targets);
  path.lambdas.resize(static_cast<std::size_t>(config.path_points));
  const double ratio = std::pow(config.lambda_min_ratio,
                                1.0 / static_cast<double>(config.path_points - 1));
  for (int k = 0; k < config.path_points; ++k)
    path.lambdas[static_cast<std::size_t>(k)] = top * std::pow(ratio, k);

  // Stratified fold assignment: shuffle each class separately, deal
  // round-robin, so every training fold keeps both classes.
  std::vector<Eigen::Index> positives, negatives;
  for (Eigen::Index m = 0; m < n; ++m)
    (targets[m] == 1.0 ? positives : negatives).push_back(m);
  Rng rng(seed);
  rng.shuffle(positives);
  rng.shuffle(negatives);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  int next = 0;
  for (Eigen::Index m : positives) fold_of[static_cast<std::size_t>(m)] = next++ % folds;
  for (Eigen::Index m : negatives) fold_of[static_cast<std::size_t>(m)] = next++ % folds;

  // Per-fold validation deviance along the path.
  Eigen::MatrixXd fold_dev(folds, config.path_points);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (Eigen::Index m = 0; m < n; ++m)
      (fold_of[static_cast<std::size_t>(m)] == f ? va : tr).push_back(m);
    Eigen::MatrixXd dtr(tr.size(), design.cols()), dva(va.size(), design.cols());
    Eigen::VectorXd ttr(tr.size()), tva(va.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      dtr.row(static_cast<Eigen::Index>(i)) = design.row(tr[i]);
      ttr[static_cast<Eigen::Index>(i)] = targets[tr[i]];
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      dva.row(static_cast<Eigen::Index>(i)) = design.row(va[i]);
      tva[static_cast<Eigen::Index>(i)] = targets[va[i]];
    }

    LassoModel warm;
    for (int k = 0; k < config.path_points; ++k) {
      warm = fit_lasso(dtr, ttr, path.lambdas[static_cast<std::size_t>(k)], config,
                       k == 0 ? nullptr : &warm);
      // mean per-row deviance (2 * NLL / n_val)
      fold_dev(f, k) =
          2.0 * deviance(dva, tva, warm.intercept, warm.coefficients) /
          static_cast<double>(va.size());
    }
  }

  path.cv_mean.resize(static_cast<std::size_t>(config.path_points));
  path.cv_se.resize(static_cast<std::size_t>(config.path_points));
  for (int k = 0; k < config.path_points; ++k) {
    const Eigen::VectorXd col = fold_dev.col(k);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() /
                       static_cast<double>(folds - 1);
    path.cv_mean[static_cast<std::size_t>(k)] = mean;
    path.cv_se[static_cast<std::size_t>(k)] =
        std::sqrt(var / static_cast<double>(folds));
  }

  // Full-data path with warm starts.
  path.models.reserve(path.lambdas.size());
  LassoModel warm;
  for (int k = 0; k < config.path_points; ++k) {
    warm = fit_lasso(design, targets, path.lambdas[static_cast<std::size_t>(k)], config,
                     k == 0 ? nullptr : &warm);
    path.models.push_back(warm);
  }

  // ties resolve toward the larger lambda
  std::size_t best = 0;
  for (std::size_t k = 1; k < path.cv_mean.size(); ++k)
    if (path.cv_mean[k] < path.cv_mean[best]) best = k;
  std::size_t chosen = best;
  if (config.rule == SelectionRule::OneStandardError) {
    const double threshold = path.cv_mean[best] + path.cv_se[best];
    for (std::size_t k = 0; k <= best; ++k) {
      if (path.cv_mean[k] <= threshold) {
        chosen = k;
        break;
      }
    }
  }
  path.chosen_index = static_cast<Eigen::Index>(chosen);
  return path;
}

}  // namespace prn
