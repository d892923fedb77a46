// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace prn {

// L1-penalized logistic regression over partial-response columns. The
// objective is the unaveraged negative log-likelihood plus lambda * |beta|_1
// with an unpenalized intercept; columns are used as-is, without
// standardization, so coefficients apply directly to the responses.
struct LassoModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  std::vector<Eigen::Index> selected;  // indices with nonzero coefficient
};

struct LassoPath {
  std::vector<double> lambdas;  // strictly decreasing, first = lambda_max
  std::vector<LassoModel> models;
  std::vector<double> cv_mean;  // mean validation deviance per lambda
  std::vector<double> cv_se;
  Eigen::Index chosen_index = 0;
};

// Lambda choice from the cross-validation curve: the one-standard-error
// rule favors parsimony; min-cv reproduces denser regimes.
enum class SelectionRule { OneStandardError, MinCv };

struct LassoConfig {
  int max_irls_iterations = 1000;
  int max_cd_sweeps = 1000;
  double coefficient_tolerance = 1e-8;
  int path_points = 100;
  double lambda_min_ratio = 1e-4;
  int folds = 5;
  SelectionRule rule = SelectionRule::OneStandardError;
};

// Smallest lambda for which the null model satisfies the KKT conditions:
// max_t |sum_m phi_mt (t_m - mean(t))|.
double lambda_max(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets);

// Cyclic coordinate descent on the IRLS quadratic approximation. Throws on
// non-convergence, reporting the residual KKT violation. warm, when given,
// seeds the coefficients.
LassoModel fit_lasso(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                     double lambda, const LassoConfig& config = {},
                     const LassoModel* warm = nullptr);

// Largest violation of the stationarity conditions at `model`: scores are
// gradient coordinates of the unpenalized deviance term.
double kkt_violation(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                     const LassoModel& model);

// Total penalized objective at `model` (for monotonicity checks).
double penalized_deviance(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          const LassoModel& model);

// Geometric path from lambda_max with warm starts, k-fold stratified
// cross-validated deviance, and the one-standard-error selection rule
// (largest lambda within one SE of the minimum).
LassoPath path_and_select(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          int folds, std::uint64_t seed,
                          const LassoConfig& config = {});

}  // namespace prn
