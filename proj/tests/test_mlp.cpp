// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include <doctest.h>

#include <cmath>

#include "prn/mlp.hpp"
#include "testutil.hpp"

using namespace prn;

namespace {

// Independent step-by-step evaluation with plain loops, no Eigen algebra.
double forward_oracle(const MlpModel& m, const Eigen::VectorXd& x) {
  double total = m.output_bias;
  for (Eigen::Index j = 0; j < m.hidden_count(); ++j) {
    double act = m.hidden_bias[j];
    for (Eigen::Index i = 0; i < m.input_count(); ++i) act += m.weights(j, i) * x[i];
    total += m.output_weights[j] * std::tanh(act);
  }
  return 1.0 / (1.0 + std::exp(-total));
}

MlpModel zero_mlp(Eigen::Index h, Eigen::Index d) {
  MlpModel m;
  m.weights = Eigen::MatrixXd::Zero(h, d);
  m.hidden_bias = Eigen::VectorXd::Zero(h);
  m.output_weights = Eigen::VectorXd::Zero(h);
  m.output_bias = 0.0;
  return m;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("forward at the all-zero model is one half") {
  MlpModel m = zero_mlp(1, 3);
  m.output_weights[0] = 1.0;
  Eigen::VectorXd x(3);
  x << 0.7, -2.0, 5.0;
  CHECK(forward(m, x) == 0.5);
}

TEST_CASE("forward saturates with a large output bias") {
  MlpModel m = zero_mlp(2, 2);
  m.output_bias = 20.0;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  CHECK(forward(m, x) >= 1.0 - 1e-8);
}

TEST_CASE("forward matches a hand evaluation on random models") {
  Rng rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index h = 1 + static_cast<Eigen::Index>(rng.index(5));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    MlpModel m = testutil::random_mlp(h, d, rng, 2.0);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = rng.gaussian();
    CHECK(forward(m, x) == doctest::Approx(forward_oracle(m, x)).epsilon(1e-12));
  }
}

TEST_CASE("logit is the inverse sigmoid of forward") {
  Rng rng(102);
  MlpModel m = testutil::random_mlp(4, 3, rng);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(3);
    for (Eigen::Index i = 0; i < 3; ++i) x[i] = rng.gaussian();
    CHECK(sigmoid(logit_output(m, x)) == doctest::Approx(forward(m, x)).epsilon(1e-12));
  }
  MlpModel z = zero_mlp(1, 2);
  CHECK(logit_output(z, Eigen::VectorXd::Zero(2)) == 0.0);
}

TEST_CASE("additive wiring makes the logit a sum of per-input branches") {
  // two hidden units, each connected to exactly one input
  MlpModel m = zero_mlp(2, 2);
  m.weights(0, 0) = 1.3;
  m.weights(1, 1) = -0.8;
  m.hidden_bias << 0.2, -0.4;
  m.output_weights << 2.0, 1.5;
  m.output_bias = 0.3;

  Rng rng(103);
  for (int rep = 0; rep < 20; ++rep) {
    const double x0 = rng.gaussian(), x1 = rng.gaussian();
    Eigen::VectorXd x(2);
    x << x0, x1;
    const double branch0 = 2.0 * std::tanh(1.3 * x0 + 0.2);
    const double branch1 = 1.5 * std::tanh(-0.8 * x1 - 0.4);
    CHECK(logit_output(m, x) ==
          doctest::Approx(branch0 + branch1 + 0.3).epsilon(1e-12));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(104);
  MlpModel m = testutil::random_mlp(2, 3, rng);
  CHECK_THROWS_AS(forward(m, Eigen::VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(logit_output(m, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("objective: cross-entropy floor at perfect prediction") {
  MlpModel m = zero_mlp(1, 1);
  m.output_bias = 40.0;  // saturated: y ~ 1 for every row
  Dataset ds;
  ds.name = "allpos";
  ds.features.resize(4, 1);
  ds.features << -1, 0, 1, 2;
  ds.targets.resize(4);
  ds.targets << 1, 1, 1, 0;  // keep both classes for validity
  ds.targets[3] = 1;         // but measure the floor on all-positive targets
  ds.feature_names = {"x"};
  Eigen::VectorXd alphas = Eigen::VectorXd::Constant(m.group_count(), 0.01);
  const ObjectiveValue v = objective(m, ds, alphas);
  // each row contributes -log(1 - 1e-12) under the clamp
  CHECK(v.cross_entropy < 1e-9);
  CHECK(v.cross_entropy >= 0.0);
}

TEST_CASE("objective: zero weights give zero penalty") {
  MlpModel m = zero_mlp(3, 2);
  Rng rng(105);
  Dataset ds = testutil::random_dataset(10, 2, rng);
  Eigen::VectorXd alphas = Eigen::VectorXd::Constant(m.group_count(), 5.0);
  const ObjectiveValue v = objective(m, ds, alphas);
  CHECK(v.penalty == 0.0);
  CHECK(v.total == v.cross_entropy);
}

TEST_CASE("objective matches a term-by-term oracle") {
  Rng rng(106);
  for (int rep = 0; rep < 10; ++rep) {
    MlpModel m = testutil::random_mlp(3, 2, rng);
    Dataset ds = testutil::random_dataset(12, 2, rng);
    Eigen::VectorXd alphas(m.group_count());
    for (Eigen::Index k = 0; k < alphas.size(); ++k) alphas[k] = 0.1 + rng.uniform();

    double ce = 0.0;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      const double y = forward_oracle(m, ds.features.row(i).transpose());
      const double p = std::clamp(y, 1e-12, 1.0 - 1e-12);
      ce -= ds.targets[i] * std::log(p) + (1.0 - ds.targets[i]) * std::log(1.0 - p);
    }
    double pen = 0.0;
    for (Eigen::Index j = 0; j < m.hidden_count(); ++j) {
      for (Eigen::Index i = 0; i < m.input_count(); ++i)
        pen += 0.5 * alphas[i] * m.weights(j, i) * m.weights(j, i);
      pen += 0.5 * alphas[m.input_count()] * m.hidden_bias[j] * m.hidden_bias[j];
      pen += 0.5 * alphas[m.input_count() + 1] * m.output_weights[j] * m.output_weights[j];
    }
    pen += 0.5 * alphas[m.input_count() + 2] * m.output_bias * m.output_bias;

    const ObjectiveValue v = objective(m, ds, alphas);
    CHECK(v.cross_entropy == doctest::Approx(ce).epsilon(1e-12));
    CHECK(v.penalty == doctest::Approx(pen).epsilon(1e-12));
    CHECK(v.total == v.cross_entropy + v.penalty);
  }
}

TEST_CASE("objective is invariant under hidden-unit permutation") {
  Rng rng(107);
  MlpModel m = testutil::random_mlp(4, 3, rng);
  Dataset ds = testutil::random_dataset(15, 3, rng);
  Eigen::VectorXd alphas = Eigen::VectorXd::Constant(m.group_count(), 0.3);

  MlpModel permuted = m;
  const std::vector<Eigen::Index> perm = {2, 0, 3, 1};
  for (Eigen::Index j = 0; j < 4; ++j) {
    permuted.weights.row(j) = m.weights.row(perm[static_cast<std::size_t>(j)]);
    permuted.hidden_bias[j] = m.hidden_bias[perm[static_cast<std::size_t>(j)]];
    permuted.output_weights[j] = m.output_weights[perm[static_cast<std::size_t>(j)]];
  }
  CHECK(objective(m, ds, alphas).total ==
        doctest::Approx(objective(permuted, ds, alphas).total).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(108);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index h = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(rng.index(6));
    MlpModel m = testutil::random_mlp(h, d, rng);
    Dataset ds = testutil::random_dataset(n, d, rng);
    Eigen::VectorXd alphas(m.group_count());
    for (Eigen::Index k = 0; k < alphas.size(); ++k) alphas[k] = 0.05 + rng.uniform();

    const Eigen::VectorXd analytic = gradient(m, ds, alphas);
    MlpModel probe = m;
    const Eigen::VectorXd numeric = testutil::finite_difference_gradient(
        [&](const Eigen::VectorXd& p) {
          probe.from_parameters(p);
          return objective(probe, ds, alphas).total;
        },
        m.to_parameters(), 1e-6);

    const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
    worst = std::max(worst, (analytic - numeric).cwiseAbs().maxCoeff() / scale);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("output-bias gradient vanishes for a zero model on balanced targets") {
  MlpModel m = zero_mlp(2, 2);
  Dataset ds;
  ds.name = "balanced";
  ds.features = Eigen::MatrixXd::Random(6, 2);
  ds.targets.resize(6);
  ds.targets << 0, 1, 0, 1, 0, 1;
  ds.feature_names = {"a", "b"};
  Eigen::VectorXd alphas = Eigen::VectorXd::Constant(m.group_count(), 0.1);
  const Eigen::VectorXd g = gradient(m, ds, alphas);
  CHECK(g[g.size() - 1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("serialization round-trips exactly") {
  Rng rng(109);
  MlpModel m = testutil::random_mlp(5, 4, rng);
  MlpModel back = deserialize_mlp(serialize_mlp(m));
  CHECK(back.weights == m.weights);
  CHECK(back.hidden_bias == m.hidden_bias);
  CHECK(back.output_weights == m.output_weights);
  CHECK(back.output_bias == m.output_bias);
  CHECK(mlp_fingerprint(back) == mlp_fingerprint(m));
}

TEST_CASE("parameter vector round-trip and group partition") {
  Rng rng(110);
  MlpModel m = testutil::random_mlp(3, 2, rng);
  MlpModel copy = m;
  copy.from_parameters(m.to_parameters());
  CHECK(copy.weights == m.weights);
  CHECK(copy.output_bias == m.output_bias);

  // groups: every parameter in exactly one group, K = d + 3
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(m.group_count()), 0);
  for (Eigen::Index p = 0; p < m.parameter_count(); ++p) {
    const Eigen::Index g = m.group_of(p);
    REQUIRE(g >= 0);
    REQUIRE(g < m.group_count());
    ++counts[static_cast<std::size_t>(g)];
  }
  const auto sizes = m.group_sizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) CHECK(counts[k] == sizes[k]);
}

}  // TEST_SUITE
