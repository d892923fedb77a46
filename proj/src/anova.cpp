// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/anova.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace prn {

namespace {

void check_index(const MlpModel& model, Eigen::Index i) {
  if (i < 0 || i >= model.input_count())
    throw std::out_of_range("feature index " + std::to_string(i) +
                            " out of range for d=" + std::to_string(model.input_count()));
}

}  // namespace

double phi0(const MlpModel& model) {
  return logit_output(model, Eigen::VectorXd::Zero(model.input_count()));
}

double phi_univariate(const MlpModel& model, Eigen::Index i, double value) {
  check_index(model, i);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.input_count());
  x[i] = value;
  return logit_output(model, x) - phi0(model);
}

double phi_bivariate(const MlpModel& model, Eigen::Index i, Eigen::Index j,
                     double value_i, double value_j) {
  check_index(model, i);
  check_index(model, j);
  if (i == j) throw std::invalid_argument("bivariate term needs two distinct features");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.input_count());
  x[i] = value_i;
  x[j] = value_j;
  return logit_output(model, x) - phi_univariate(model, i, value_i) -
         phi_univariate(model, j, value_j) - phi0(model);
}

double phi_general(const MlpModel& model, const std::vector<Eigen::Index>& index_set,
                   const Eigen::VectorXd& values) {
  if (index_set.empty()) throw std::invalid_argument("phi_general: empty index set");
  if (index_set.size() > 6)
    throw std::invalid_argument("phi_general is guarded to at most 6 indices");
  if (values.size() != static_cast<Eigen::Index>(index_set.size()))
    throw std::invalid_argument("phi_general: one value per index required");
  for (std::size_t k = 0; k < index_set.size(); ++k) {
    check_index(model, index_set[k]);
    if (k > 0 && index_set[k] <= index_set[k - 1])
      throw std::invalid_argument("phi_general: indices must be strictly increasing");
  }

  const double anchor = phi0(model);
  const std::size_t n = index_set.size();
  const unsigned full = (1u << n) - 1u;

  // phi for every non-empty subset, in increasing popcount order so all
  // proper subsets are available when needed.
  std::map<unsigned, double> memo;
  std::vector<unsigned> masks;
  for (unsigned m = 1; m <= full; ++m) masks.push_back(m);
  std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });

  for (unsigned mask : masks) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.input_count());
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1u << k)) x[index_set[k]] = values[static_cast<Eigen::Index>(k)];
    double value = logit_output(model, x) - anchor;
    for (unsigned sub = (mask - 1u) & mask; sub != 0u; sub = (sub - 1u) & mask)
      value -= memo.at(sub);
    memo[mask] = value;
  }
  return memo.at(full);
}

Eigen::VectorXd univariate_response(const MlpModel& model, Eigen::Index i,
                                    const Eigen::VectorXd& values) {
  check_index(model, i);
  // activations: n x h = values * w_col_i^T + bias
  Eigen::MatrixXd z = ((values * model.weights.col(i).transpose()).rowwise() +
                       model.hidden_bias.transpose())
                          .array()
                          .tanh();
  Eigen::VectorXd logits = (z * model.output_weights).array() + model.output_bias;
  return logits.array() - phi0(model);
}

Eigen::VectorXd joint_response(const MlpModel& model, Eigen::Index i, Eigen::Index j,
                               const Eigen::VectorXd& values_i,
                               const Eigen::VectorXd& values_j) {
  check_index(model, i);
  check_index(model, j);
  if (values_i.size() != values_j.size())
    throw std::invalid_argument("joint_response: value vectors must align");
  Eigen::MatrixXd act = values_i * model.weights.col(i).transpose() +
                        values_j * model.weights.col(j).transpose();
  Eigen::MatrixXd z = (act.rowwise() + model.hidden_bias.transpose()).array().tanh();
  Eigen::VectorXd logits = (z * model.output_weights).array() + model.output_bias;
  return logits.array() - phi0(model);
}

PartialResponseBasis build_design_matrix(const MlpModel& model, const Dataset& train,
                                         const PairPolicy& policy,
                                         const Eigen::VectorXd& relevance) {
  if (train.cols() != model.input_count())
    throw std::invalid_argument("dataset does not match model inputs");
  const Eigen::Index d = model.input_count();
  const Eigen::Index n = train.rows();

  PartialResponseBasis basis;
  basis.phi0 = phi0(model);

  // Which inputs may appear in pairs.
  std::vector<Eigen::Index> pairable(static_cast<std::size_t>(d));
  std::iota(pairable.begin(), pairable.end(), Eigen::Index{0});
  if (d > policy.max_inputs_for_all) {
    if (relevance.size() != d)
      throw std::invalid_argument(
          "pair policy needs an ARD relevance vector for d > " +
          std::to_string(policy.max_inputs_for_all));
    std::stable_sort(pairable.begin(), pairable.end(), [&](Eigen::Index a, Eigen::Index b) {
      return relevance[a] > relevance[b];
    });
    pairable.resize(static_cast<std::size_t>(std::min(policy.top_m, d)));
    std::sort(pairable.begin(), pairable.end());
  }

  for (Eigen::Index i = 0; i < d; ++i)
    basis.terms.push_back({{i}, train.feature_names[static_cast<std::size_t>(i)]});
  for (std::size_t a = 0; a < pairable.size(); ++a)
    for (std::size_t b = a + 1; b < pairable.size(); ++b) {
      const Eigen::Index i = pairable[a], j = pairable[b];
      basis.terms.push_back({{i, j},
                             train.feature_names[static_cast<std::size_t>(i)] + ":" +
                                 train.feature_names[static_cast<std::size_t>(j)]});
    }

  basis.design.resize(n, basis.term_count());
  // univariate columns first; cached for the bivariate corrections
  for (Eigen::Index i = 0; i < d; ++i)
    basis.design.col(i) = univariate_response(model, i, train.features.col(i));
  for (Eigen::Index t = d; t < basis.term_count(); ++t) {
    const auto& term = basis.terms[static_cast<std::size_t>(t)];
    const Eigen::Index i = term.features[0], j = term.features[1];
    basis.design.col(t) =
        joint_response(model, i, j, train.features.col(i), train.features.col(j)) -
        basis.design.col(i) - basis.design.col(j);
  }
  return basis;
}

PartialResponseBasis restrict_basis(const PartialResponseBasis& basis,
                                    const std::vector<Eigen::Index>& allowed) {
  PartialResponseBasis out;
  out.phi0 = basis.phi0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < basis.term_count(); ++t) {
    const auto& term = basis.terms[static_cast<std::size_t>(t)];
    const bool ok = std::all_of(term.features.begin(), term.features.end(),
                                [&](Eigen::Index f) {
                                  return std::find(allowed.begin(), allowed.end(), f) !=
                                         allowed.end();
                                });
    if (ok) {
      keep.push_back(t);
      out.terms.push_back(term);
    }
  }
  out.design.resize(basis.design.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    out.design.col(static_cast<Eigen::Index>(c)) = basis.design.col(keep[c]);
  return out;
}

}  // namespace prn
