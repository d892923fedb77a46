// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "prn/dataset.hpp"
#include "prn/mlp.hpp"
#include "prn/scg.hpp"

namespace prn {

struct ArdConfig {
  double alpha_init = 0.01;
  double alpha_min = 1e-6;
  double alpha_max = 1e6;
  int max_cycles = 12;
  double cycle_tolerance = 1e-3;  // max relative alpha change
  double eigenvalue_floor = 1e-8;
};

// Per-group weight-decay hyperparameters and their effective parameter
// counts. gammas[k] is the number of well-determined parameters in group k.
struct ArdState {
  Eigen::VectorXd alphas;
  Eigen::VectorXd gammas;
  std::vector<Eigen::Index> group_sizes;
  int cycle = 0;
};

struct HessianInfo {
  Eigen::MatrixXd matrix;                // P x P, regularized objective
  double eigenvalue_floor = 0.0;
  Eigen::VectorXd group_inverse_traces;  // Tr_k(A^-1) per group
};

// Sum of squared weights per group, in group order.
Eigen::VectorXd group_sum_squares(const MlpModel& model);

// Gauss-Newton curvature of the data term plus the exact penalty diagonal:
//   A = sum_m y_m (1 - y_m) g_m g_m^T + diag(alpha by group)
// with g_m the gradient of the logit. Inverse traces come from an
// eigendecomposition with eigenvalues floored before inversion.
HessianInfo hessian(const MlpModel& model, const Dataset& data,
                    const Eigen::VectorXd& alphas,
                    double eigenvalue_floor = 1e-8);

// Evidence update at the current most-probable weights:
//   1/alpha_k = (sum_l w_kl^2 + Tr_k(A^-1)) / N_k      (clamped)
//   gamma_k   = N_k - alpha_k Tr_k(A^-1)               (clamped to [0, N_k])
// The new alpha is used when evaluating gamma, which makes the two
// closed-form expressions for 1/alpha agree identically when no clamp fires.
ArdState update_hyperparameters(const ArdState& state, const MlpModel& model,
                                const HessianInfo& hessian_info,
                                const ArdConfig& config);

struct ArdCycleRecord {
  int cycle = 0;
  Eigen::VectorXd alphas;
  Eigen::VectorXd gammas;
  Eigen::VectorXd sum_squares;
};

struct ArdTrainResult {
  MlpModel model;
  ArdState state;
  std::vector<ArdCycleRecord> history;
};

// Outer evidence loop: alternate SCG minimization of the penalized
// cross-entropy with hyperparameter re-estimation until the alphas settle,
// then train once more under the final alphas.
ArdTrainResult train_ard(const Dataset& train, Eigen::Index hidden,
                         std::uint64_t seed, const ScgConfig& scg,
                         const ArdConfig& ard);

}  // namespace prn
