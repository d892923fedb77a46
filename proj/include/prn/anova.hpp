// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "prn/dataset.hpp"
#include "prn/mlp.hpp"

namespace prn {

// One component of the functional ANOVA decomposition of the logit,
// anchored at the zero vector (the training median after normalization).
struct AnovaTerm {
  std::vector<Eigen::Index> features;  // strictly increasing, size 1 or 2
  std::string name;

  bool is_univariate() const { return features.size() == 1; }
  bool is_bivariate() const { return features.size() == 2; }
};

struct PartialResponseBasis {
  double phi0 = 0.0;
  std::vector<AnovaTerm> terms;  // univariates by index, then pairs lexicographic
  Eigen::MatrixXd design;        // N x T, column t = term t at each training row

  Eigen::Index term_count() const { return static_cast<Eigen::Index>(terms.size()); }
};

// Which bivariate pairs get materialized. All pairs up to max_inputs_for_all
// inputs; beyond that only pairs among the top_m inputs by ARD relevance
// sum(w^2)/alpha.
struct PairPolicy {
  Eigen::Index max_inputs_for_all = 40;
  Eigen::Index top_m = 15;
};

double phi0(const MlpModel& model);
double phi_univariate(const MlpModel& model, Eigen::Index i, double value);
double phi_bivariate(const MlpModel& model, Eigen::Index i, Eigen::Index j,
                     double value_i, double value_j);

// Full recursion over nested subsets; exponential, guarded to sets of at
// most 6 indices. Used for identity checking, not in the pipeline.
double phi_general(const MlpModel& model, const std::vector<Eigen::Index>& index_set,
                   const Eigen::VectorXd& values);

// Vectorized per-column evaluation used by the design matrix and nomogram
// grids: the univariate response phi_i over many values of x_i, and the
// joint two-input response logit(x_i, x_j, 0...) - phi0.
Eigen::VectorXd univariate_response(const MlpModel& model, Eigen::Index i,
                                    const Eigen::VectorXd& values);
Eigen::VectorXd joint_response(const MlpModel& model, Eigen::Index i, Eigen::Index j,
                               const Eigen::VectorXd& values_i,
                               const Eigen::VectorXd& values_j);

// relevance may be empty when the policy materializes all pairs anyway.
PartialResponseBasis build_design_matrix(const MlpModel& model, const Dataset& train,
                                         const PairPolicy& policy,
                                         const Eigen::VectorXd& relevance = {});

// Keep only terms whose features are all in `allowed`; used for the
// reduced models (an explicit variable subset) exposed by the CLI.
PartialResponseBasis restrict_basis(const PartialResponseBasis& basis,
                                    const std::vector<Eigen::Index>& allowed);

}  // namespace prn
