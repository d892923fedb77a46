// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "prn/anova.hpp"
#include "prn/dataset.hpp"
#include "prn/lasso.hpp"
#include "prn/mlp.hpp"
#include "prn/scg.hpp"

namespace prn {

// One replicated module of the structured network: a univariate or
// bivariate branch whose hidden layer is copied from the source MLP and
// whose output layer carries the Lasso scaling.
struct SubNetwork {
  std::vector<Eigen::Index> input_indices;  // size 1 or 2, strictly increasing
  std::string name;
  Eigen::MatrixXd hidden_weights;  // h x inputs
  Eigen::VectorXd hidden_bias;     // h
  Eigen::VectorXd output_weights;  // h
  double output_bias = 0.0;

  Eigen::Index hidden_count() const { return hidden_weights.rows(); }
  Eigen::Index fan_in() const { return hidden_weights.cols(); }
};

struct Provenance {
  std::uint64_t mlp_hash = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

// Structured additive network: logit(x) = global_bias + sum of subnetwork
// contributions. At construction it reproduces the logistic Lasso over
// partial responses exactly.
struct PrnModel {
  Eigen::Index input_count = 0;
  std::vector<SubNetwork> subnetworks;
  double global_bias = 0.0;
  Provenance source;

  Eigen::Index parameter_count() const;
};

// Contribution of one subnetwork at a full input vector.
double subnetwork_value(const SubNetwork& net, const Eigen::VectorXd& x);

// Contribution over explicit branch inputs (grids for nomograms): columns
// of `branch_inputs` align with net.input_indices.
Eigen::VectorXd subnetwork_response(const SubNetwork& net,
                                    const Eigen::MatrixXd& branch_inputs);

struct PrnForward {
  double probability = 0.0;
  double logit = 0.0;
  Eigen::VectorXd contributions;  // one per subnetwork
};

PrnForward prn_forward(const PrnModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd prn_logit_batch(const PrnModel& model, const Eigen::MatrixXd& features);
Eigen::VectorXd prn_forward_batch(const PrnModel& model, const Eigen::MatrixXd& features);
// N x S matrix of per-subnetwork contributions.
Eigen::MatrixXd prn_contributions_batch(const PrnModel& model,
                                        const Eigen::MatrixXd& features);

// Replicates the Lasso selection as a structured network. Every selected
// input gets one univariate subnetwork whose output scaling merges its own
// coefficient with the corrections from every selected pair containing it;
// every selected pair additionally gets one coupled two-input subnetwork.
PrnModel build_prn(const MlpModel& mlp, const PartialResponseBasis& basis,
                   const LassoModel& lasso);

// Gradient-descent refinement of all subnetwork parameters under a single
// global weight decay; the global bias is trained but not penalized.
PrnModel retrain_prn(const PrnModel& model, const Dataset& train, double decay,
                     const ScgConfig& scg);

// Cross-entropy + (decay/2)*|subnetwork parameters|^2 at the current weights,
// and its gradient in packed parameter order (per subnetwork: hidden weights
// column-major, hidden biases, output weights, output bias; global bias last).
double prn_objective(const PrnModel& model, const Dataset& train, double decay);
Eigen::VectorXd prn_gradient(const PrnModel& model, const Dataset& train, double decay);

// Shift each subnetwork's output bias so its contribution vanishes at the
// anchor (all-zero inputs); the total shift moves into global_bias, leaving
// the forward map unchanged.
PrnModel recenter(const PrnModel& model);

// Scale each subnetwork by its new Lasso coefficient and drop zeros;
// the new intercept becomes the global bias.
PrnModel apply_reweighting(const PrnModel& model, const LassoModel& lasso);

struct RelassoResult {
  PrnModel model;
  LassoPath path;
  bool all_terms_dropped = false;
};

// Second Lasso pass over the retrained subnetwork responses.
RelassoResult relasso(const PrnModel& model, const Dataset& train, int folds,
                      std::uint64_t seed, const LassoConfig& config = {});

std::string serialize_prn(const PrnModel& model);
PrnModel deserialize_prn(const std::string& text);

}  // namespace prn
