// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/ard.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace prn {

Eigen::VectorXd group_sum_squares(const MlpModel& model) {
  const Eigen::VectorXd params = model.to_parameters();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.group_count());
  for (Eigen::Index p = 0; p < params.size(); ++p)
    out[model.group_of(p)] += params[p] * params[p];
  return out;
}

HessianInfo hessian(const MlpModel& model, const Dataset& data,
                    const Eigen::VectorXd& alphas, double eigenvalue_floor) {
  if (alphas.size() != model.group_count())
    throw std::invalid_argument("one alpha per weight group required");
  const Eigen::Index h = model.hidden_count();
  const Eigen::Index d = model.input_count();
  const Eigen::Index P = model.parameter_count();
  const Eigen::Index N = data.rows();

  HessianInfo info;
  info.eigenvalue_floor = eigenvalue_floor;
  info.matrix = Eigen::MatrixXd::Zero(P, P);

  // Accumulate sum_m y(1-y) g g^T in fixed-size row chunks.
  const Eigen::Index chunk = 4096;
  Eigen::MatrixXd scaled(std::min(chunk, N), P);
  for (Eigen::Index begin = 0; begin < N; begin += chunk) {
    const Eigen::Index rows = std::min(chunk, N - begin);
    const auto x = data.features.middleRows(begin, rows);
    Eigen::MatrixXd z = ((x * model.weights.transpose()).rowwise() +
                         model.hidden_bias.transpose())
                            .array()
                            .tanh();  // rows x h
    Eigen::VectorXd a = (z * model.output_weights).array() + model.output_bias;

    scaled.resize(rows, P);
    for (Eigen::Index m = 0; m < rows; ++m) {
      const double y = sigmoid(a[m]);
      const double s = std::sqrt(std::max(y * (1.0 - y), 0.0));
      // logit gradient in canonical order
      for (Eigen::Index j = 0; j < h; ++j) {
        const double dz = model.output_weights[j] * (1.0 - z(m, j) * z(m, j));
        scaled.block(m, j * d, 1, d) = (s * dz) * x.row(m);
        scaled(m, h * d + j) = s * dz;
        scaled(m, h * d + h + j) = s * z(m, j);
      }
      scaled(m, h * d + 2 * h) = s;
    }
    info.matrix.noalias() += scaled.transpose() * scaled;
  }

  for (Eigen::Index p = 0; p < P; ++p)
    info.matrix(p, p) += alphas[model.group_of(p)];

  // Symmetrize away accumulation round-off before decomposing.
  info.matrix = 0.5 * (info.matrix + info.matrix.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info.matrix);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("hessian: eigendecomposition failed");
  const Eigen::VectorXd floored =
      eig.eigenvalues().array().max(eigenvalue_floor);
  const Eigen::MatrixXd& V = eig.eigenvectors();

  info.group_inverse_traces = Eigen::VectorXd::Zero(model.group_count());
  for (Eigen::Index p = 0; p < P; ++p) {
    double diag = 0.0;
    for (Eigen::Index e = 0; e < P; ++e) diag += V(p, e) * V(p, e) / floored[e];
    info.group_inverse_traces[model.group_of(p)] += diag;
  }
  return info;
}

ArdState update_hyperparameters(const ArdState& state, const MlpModel& model,
                                const HessianInfo& hessian_info,
                                const ArdConfig& config) {
  const Eigen::Index K = model.group_count();
  if (state.alphas.size() != K)
    throw std::invalid_argument("ard state does not match model groups");
  const Eigen::VectorXd sumsq = group_sum_squares(model);

  ArdState next = state;
  next.cycle = state.cycle + 1;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double nk = static_cast<double>(state.group_sizes[static_cast<std::size_t>(k)]);
    const double trace = hessian_info.group_inverse_traces[k];
    double alpha = nk / (sumsq[k] + trace);
    alpha = std::clamp(alpha, config.alpha_min, config.alpha_max);
    double gamma = nk - alpha * trace;
    gamma = std::clamp(gamma, 0.0, nk);
    next.alphas[k] = alpha;
    next.gammas[k] = gamma;
  }
  return next;
}

ArdTrainResult train_ard(const Dataset& train, Eigen::Index hidden,
                         std::uint64_t seed, const ScgConfig& scg,
                         const ArdConfig& ard) {
  train.validate();
  Rng rng(seed);
  ArdTrainResult result;
  result.model = make_mlp(hidden, train.cols(), rng);

  ArdState state;
  state.alphas = Eigen::VectorXd::Constant(result.model.group_count(), ard.alpha_init);
  state.gammas = Eigen::VectorXd::Zero(result.model.group_count());
  state.group_sizes = result.model.group_sizes();
  state.cycle = 0;

  auto minimize = [&](const Eigen::VectorXd& alphas) {
    MlpModel scratch = result.model;
    ObjectiveFn f = [&](const Eigen::VectorXd& p) {
      scratch.from_parameters(p);
      return objective(scratch, train, alphas).total;
    };
    GradientFn g = [&](const Eigen::VectorXd& p) {
      scratch.from_parameters(p);
      return gradient(scratch, train, alphas);
    };
    ScgResult r = scg_minimize(f, g, result.model.to_parameters(), scg);
    result.model.from_parameters(r.x);
  };

  for (int cycle = 1; cycle <= ard.max_cycles; ++cycle) {
    minimize(state.alphas);
    HessianInfo info = hessian(result.model, train, state.alphas, ard.eigenvalue_floor);
    ArdState next = update_hyperparameters(state, result.model, info, ard);

    double max_rel = 0.0;
    for (Eigen::Index k = 0; k < state.alphas.size(); ++k)
      max_rel = std::max(max_rel,
                         std::abs(next.alphas[k] - state.alphas[k]) / state.alphas[k]);

    result.history.push_back(
        {next.cycle, next.alphas, next.gammas, group_sum_squares(result.model)});
    state = next;
    if (max_rel < ard.cycle_tolerance) break;
  }

  // settle the weights under the final hyperparameters
  minimize(state.alphas);
  result.state = state;
  return result;
}

}  // namespace prn
