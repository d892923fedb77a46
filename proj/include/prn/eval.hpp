// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <string>

namespace prn {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EvalReport {
  double auroc = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% Hanley-McNeil interval
  double cutpoint = 0.5;
  ConfusionCounts confusion;
  long n_test = 0;
};

struct McNemarResult {
  long b = 0;  // first classifier correct, second wrong
  long c = 0;  // first wrong, second correct
  double statistic = 0.0;  // continuity-corrected (|b-c|-1)^2/(b+c)
  double p_value = 1.0;    // exact binomial when b+c < 25, else chi-square(1)
  std::string note;
};

// Mann-Whitney AUROC with half credit for ties. Requires both classes.
double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets);

// AUROC plus confidence interval and confusion at the cut-point.
EvalReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets,
                    double cutpoint = 0.5);

ConfusionCounts confusion_at(const Eigen::VectorXd& scores,
                             const Eigen::VectorXd& targets, double cutpoint);

// Paired comparison of two classifiers' binary predictions.
McNemarResult mcnemar(const Eigen::VectorXd& pred_a, const Eigen::VectorXd& pred_b,
                      const Eigen::VectorXd& targets);

}  // namespace prn
