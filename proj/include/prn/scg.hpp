// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace prn {

struct ScgConfig {
  int max_iterations = 100;
  double objective_tolerance = 1e-8;  // relative change, two successive successful steps
  double gradient_tolerance = 1e-6;
  double initial_scale = 1e-4;        // initial Levenberg-Marquardt scale
};

struct ScgResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  std::vector<double> trace;  // objective after each iteration
  int iterations = 0;
  std::string stop_reason;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Moller's scaled conjugate gradient. Deterministic, no line search; step
// sizes come from a one-sided curvature estimate with an adaptive
// Levenberg-Marquardt scale. Throws if the objective or gradient turns
// non-finite.
ScgResult scg_minimize(const ObjectiveFn& f, const GradientFn& g,
                       const Eigen::VectorXd& start, const ScgConfig& config);

}  // namespace prn
