// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "prn/dataset.hpp"
#include "prn/rng.hpp"

namespace prn {

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Cross-entropy is evaluated on probabilities clamped away from 0 and 1 so
// saturated units cannot produce log(0).
constexpr double kProbClamp = 1e-12;

// One-hidden-layer network: tanh hidden units, sigmoid output.
//
// Parameters live in a fixed canonical order used by the optimizer and the
// Hessian: first-layer weights row-major by (hidden, input), then hidden
// biases, then output weights, then the output bias. Weight-decay groups
// follow the evidence framework: one group per input's fan-out column plus
// one each for hidden biases, output weights and the output bias, K = d + 3.
struct MlpModel {
  Eigen::MatrixXd weights;      // h x d, first layer
  Eigen::VectorXd hidden_bias;  // h
  Eigen::VectorXd output_weights;  // h
  double output_bias = 0.0;

  Eigen::Index hidden_count() const { return weights.rows(); }
  Eigen::Index input_count() const { return weights.cols(); }
  Eigen::Index parameter_count() const {
    return weights.size() + 2 * hidden_count() + 1;
  }
  Eigen::Index group_count() const { return input_count() + 3; }

  // Group index of the parameter at canonical position p.
  Eigen::Index group_of(Eigen::Index p) const;
  std::vector<Eigen::Index> group_sizes() const;

  Eigen::VectorXd to_parameters() const;
  void from_parameters(const Eigen::VectorXd& params);
};

MlpModel make_mlp(Eigen::Index hidden, Eigen::Index inputs, Rng& rng);

double logit_output(const MlpModel& model, const Eigen::VectorXd& x);
double forward(const MlpModel& model, const Eigen::VectorXd& x);

// Logit for every row of a feature matrix (rows are observations).
Eigen::VectorXd logit_batch(const MlpModel& model, const Eigen::MatrixXd& features);
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& features);

struct ObjectiveValue {
  double cross_entropy = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

// alphas: one weight-decay strength per group, all positive.
ObjectiveValue objective(const MlpModel& model, const Dataset& data,
                         const Eigen::VectorXd& alphas);

// Analytic gradient of objective().total in canonical parameter order.
Eigen::VectorXd gradient(const MlpModel& model, const Dataset& data,
                         const Eigen::VectorXd& alphas);

// Versioned text serialization shared by the downstream tooling.
std::string serialize_mlp(const MlpModel& model);
MlpModel deserialize_mlp(const std::string& text);
std::uint64_t mlp_fingerprint(const MlpModel& model);

}  // namespace prn
