// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace prn {

double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets) {
  if (scores.size() != targets.size())
    throw std::invalid_argument("auroc: score/target length mismatch");
  const Eigen::Index n = scores.size();
  long n_pos = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (targets[i] == 1.0) ++n_pos;
  const long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auroc: both classes must be present");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  // average ranks over tie runs, rank-sum of positives
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (targets[order[k]] == 1.0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      (static_cast<double>(n_pos) + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ConfusionCounts confusion_at(const Eigen::VectorXd& scores,
                             const Eigen::VectorXd& targets, double cutpoint) {
  if (scores.size() != targets.size())
    throw std::invalid_argument("confusion: score/target length mismatch");
  ConfusionCounts c;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= cutpoint;
    const bool actual = targets[i] == 1.0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

EvalReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets,
                    double cutpoint) {
  EvalReport r;
  r.auroc = auroc(scores, targets);
  r.cutpoint = cutpoint;
  r.confusion = confusion_at(scores, targets, cutpoint);
  r.n_test = static_cast<long>(scores.size());

  long n_pos = 0;
  for (Eigen::Index i = 0; i < targets.size(); ++i)
    if (targets[i] == 1.0) ++n_pos;
  const long n_neg = r.n_test - n_pos;

  // Hanley-McNeil standard error of the area
  const double a = r.auroc;
  const double q1 = a / (2.0 - a);
  const double q2 = 2.0 * a * a / (1.0 + a);
  const double var = (a * (1.0 - a) + (static_cast<double>(n_pos) - 1.0) * (q1 - a * a) +
                      (static_cast<double>(n_neg) - 1.0) * (q2 - a * a)) /
                     (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  const double se = std::sqrt(std::max(var, 0.0));
  r.ci_lo = std::max(0.0, a - 1.96 * se);
  r.ci_hi = std::min(1.0, a + 1.96 * se);
  return r;
}

McNemarResult mcnemar(const Eigen::VectorXd& pred_a, const Eigen::VectorXd& pred_b,
                      const Eigen::VectorXd& targets) {
  if (pred_a.size() != targets.size() || pred_b.size() != targets.size())
    throw std::invalid_argument("mcnemar: length mismatch");
  McNemarResult r;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const bool a_ok = pred_a[i] == targets[i];
    const bool b_ok = pred_b[i] == targets[i];
    if (a_ok && !b_ok) ++r.b;
    if (!a_ok && b_ok) ++r.c;
  }
  const long discordant = r.b + r.c;
  if (discordant == 0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.note = "no discordant pairs";
    return r;
  }

  const double corrected = std::abs(static_cast<double>(r.b - r.c)) - 1.0;
  r.statistic = corrected * corrected / static_cast<double>(discordant);

  if (discordant < 25) {
    // exact two-sided binomial(n, 1/2) tail, doubled and capped
    const long k = std::min(r.b, r.c);
    double tail = 0.0;
    double binom = 1.0;  // C(n, 0)
    for (long i = 0; i <= k; ++i) {
      if (i > 0) binom = binom * static_cast<double>(discordant - i + 1) / static_cast<double>(i);
      tail += binom;
    }
    tail *= std::pow(0.5, static_cast<double>(discordant));
    r.p_value = std::min(1.0, 2.0 * tail);
    r.note = "exact binomial";
  } else {
    // chi-square(1) survival function
    r.p_value = std::erfc(std::sqrt(r.statistic / 2.0));
    r.note = "chi-square approximation";
  }
  return r;
}

}  // namespace prn
