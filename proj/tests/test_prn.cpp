// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include <doctest.h>

#include <cmath>

#include "prn/prn.hpp"
#include "testutil.hpp"

using namespace prn;

namespace {

struct Fixture {
  MlpModel mlp;
  Dataset train;
  PartialResponseBasis basis;
};

Fixture make_fixture(Rng& rng, Eigen::Index n = 60, Eigen::Index d = 4,
                     Eigen::Index h = 3) {
  Fixture f;
  f.mlp = testutil::random_mlp(h, d, rng, 1.2);
  f.train = testutil::random_dataset(n, d, rng);
  f.basis = build_design_matrix(f.mlp, f.train, {});
  return f;
}

// Independent evaluation of the Lasso-over-partial-responses model at x.
double lasso_response_oracle(const MlpModel& mlp, const PartialResponseBasis& basis,
                             const LassoModel& lasso, const Eigen::VectorXd& x) {
  double total = lasso.intercept;
  for (Eigen::Index t = 0; t < basis.term_count(); ++t) {
    if (lasso.coefficients[t] == 0.0) continue;
    const auto& term = basis.terms[static_cast<std::size_t>(t)];
    const double value =
        term.is_univariate()
            ? phi_univariate(mlp, term.features[0], x[term.features[0]])
            : phi_bivariate(mlp, term.features[0], term.features[1], x[term.features[0]],
                            x[term.features[1]]);
    total += lasso.coefficients[t] * value;
  }
  return total;
}

LassoModel manual_lasso(const PartialResponseBasis& basis,
                        std::initializer_list<std::pair<Eigen::Index, double>> betas,
                        double intercept) {
  LassoModel lasso;
  lasso.intercept = intercept;
  lasso.coefficients = Eigen::VectorXd::Zero(basis.term_count());
  for (const auto& [idx, beta] : betas) {
    lasso.coefficients[idx] = beta;
    if (beta != 0.0) lasso.selected.push_back(idx);
  }
  return lasso;
}

}  // namespace

TEST_SUITE("prn") {

TEST_CASE("construction is forward-equivalent to the lasso model") {
  Rng rng(501);
  Fixture f = make_fixture(rng);
  // univariate terms 0 and 2, pair (1,3): term index d + position in pair list
  Eigen::Index pair13 = -1;
  for (Eigen::Index t = 0; t < f.basis.term_count(); ++t)
    if (f.basis.terms[static_cast<std::size_t>(t)].features ==
        std::vector<Eigen::Index>{1, 3})
      pair13 = t;
  REQUIRE(pair13 >= 0);
  const LassoModel lasso =
      manual_lasso(f.basis, {{0, 0.8}, {2, -1.4}, {pair13, 0.6}}, 0.25);

  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  // at every training row
  for (Eigen::Index m = 0; m < f.train.rows(); ++m) {
    const double expected = lasso.intercept +
                            (f.basis.design.row(m) * lasso.coefficients).value();
    const double got = prn_forward(prn, f.train.features.row(m).transpose()).logit;
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
  }
  // and at 1000 random points, against per-point recomputation
  for (int rep = 0; rep < 1000; ++rep) {
    Eigen::VectorXd x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = rng.gaussian();
    CHECK(prn_forward(prn, x).logit ==
          doctest::Approx(lasso_response_oracle(f.mlp, f.basis, lasso, x)).epsilon(1e-10));
  }
}

TEST_CASE("empty selection collapses to the intercept") {
  Rng rng(502);
  Fixture f = make_fixture(rng, 20);
  const LassoModel lasso = manual_lasso(f.basis, {}, -0.7);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  CHECK(prn.subnetworks.empty());
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = rng.gaussian();
    CHECK(prn_forward(prn, x).logit == -0.7);
    CHECK(prn_forward(prn, x).probability == doctest::Approx(sigmoid(-0.7)));
  }
}

TEST_CASE("equal pair and univariate coefficients cancel the corrections") {
  Rng rng(503);
  Fixture f = make_fixture(rng, 20);
  Eigen::Index pair01 = -1;
  for (Eigen::Index t = 0; t < f.basis.term_count(); ++t)
    if (f.basis.terms[static_cast<std::size_t>(t)].features ==
        std::vector<Eigen::Index>{0, 1})
      pair01 = t;
  const double beta = 0.9;
  const LassoModel lasso =
      manual_lasso(f.basis, {{0, beta}, {1, beta}, {pair01, beta}}, 0.0);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);

  int zero_weight_univariates = 0;
  for (const auto& net : prn.subnetworks)
    if (net.fan_in() == 1 && net.output_weights.cwiseAbs().maxCoeff() == 0.0)
      ++zero_weight_univariates;
  CHECK(zero_weight_univariates == 2);
}

TEST_CASE("pair decomposition algebra holds pointwise") {
  // (b_k - b_kl) phi_k + (b_l - b_kl) phi_l + b_kl (logit(x_k, x_l) - phi0)
  //   = b_k phi_k + b_l phi_l + b_kl phi_kl
  Rng rng(504);
  for (int rep = 0; rep < 50; ++rep) {
    MlpModel m = testutil::random_mlp(3, 3, rng, 1.5);
    const double bk = rng.gaussian(), bl = rng.gaussian(), bkl = rng.gaussian();
    const double xk = rng.gaussian(), xl = rng.gaussian();

    const double pk = phi_univariate(m, 0, xk);
    const double pl = phi_univariate(m, 1, xl);
    const double pkl = phi_bivariate(m, 0, 1, xk, xl);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x[0] = xk;
    x[1] = xl;
    const double joint = logit_output(m, x) - phi0(m);

    const double replicated = (bk - bkl) * pk + (bl - bkl) * pl + bkl * joint;
    const double direct = bk * pk + bl * pl + bkl * pkl;
    CHECK(replicated == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("subnetworks vanish at the anchor at construction") {
  Rng rng(505);
  Fixture f = make_fixture(rng, 30);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 1.0}, {1, -2.0}, {5, 0.4}}, 0.1);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  for (const auto& net : prn.subnetworks)
    CHECK(std::abs(subnetwork_value(net, zero)) < 1e-10);
  CHECK(prn_forward(prn, zero).probability ==
        doctest::Approx(sigmoid(lasso.intercept)).epsilon(1e-12));
}

TEST_CASE("contributions sum to the logit") {
  Rng rng(506);
  Fixture f = make_fixture(rng, 20);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 0.5}, {3, 1.2}, {4, -0.3}}, -0.2);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = rng.gaussian();
    const PrnForward fwd = prn_forward(prn, x);
    CHECK(fwd.contributions.sum() + prn.global_bias ==
          doctest::Approx(fwd.logit).epsilon(1e-12));
    CHECK(fwd.probability == doctest::Approx(sigmoid(fwd.logit)).epsilon(1e-12));
  }
}

TEST_CASE("batch forward agrees with the scalar path") {
  Rng rng(507);
  Fixture f = make_fixture(rng, 40);
  const LassoModel lasso = manual_lasso(f.basis, {{1, 0.7}, {6, 0.5}}, 0.05);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  const Eigen::VectorXd batch = prn_logit_batch(prn, f.train.features);
  for (Eigen::Index m = 0; m < f.train.rows(); ++m)
    CHECK(batch[m] ==
          doctest::Approx(prn_forward(prn, f.train.features.row(m).transpose()).logit)
              .epsilon(1e-12));
}

TEST_CASE("retraining gradient matches central finite differences") {
  Rng rng(515);
  Fixture f = make_fixture(rng, 30);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 0.9}, {2, -0.5}, {7, 0.6}}, 0.2);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  const double decay = 0.05;

  const Eigen::VectorXd analytic = prn_gradient(prn, f.train, decay);

  // perturb every parameter in the documented packed order
  std::vector<double*> slots;
  PrnModel probe = prn;
  for (auto& net : probe.subnetworks) {
    for (Eigen::Index c = 0; c < net.fan_in(); ++c)
      for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
        slots.push_back(&net.hidden_weights(j, c));
    for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
      slots.push_back(&net.hidden_bias[j]);
    for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
      slots.push_back(&net.output_weights[j]);
    slots.push_back(&net.output_bias);
  }
  slots.push_back(&probe.global_bias);
  REQUIRE(static_cast<Eigen::Index>(slots.size()) == analytic.size());

  const double step = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + step;
    const double hi = prn_objective(probe, f.train, decay);
    *slots[i] = saved - step;
    const double lo = prn_objective(probe, f.train, decay);
    *slots[i] = saved;
    const double numeric = (hi - lo) / (2.0 * step);
    worst = std::max(worst,
                     std::abs(analytic[static_cast<Eigen::Index>(i)] - numeric) /
                         std::max(1.0, std::abs(numeric)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("retraining never worsens the training objective") {
  Rng rng(508);
  Dataset train = testutil::planted_dataset(120, 3, rng, [](const auto& row) {
    return 1.5 * row[0] - row[1];
  });
  MlpModel mlp = testutil::random_mlp(3, 3, rng);
  const PartialResponseBasis basis = build_design_matrix(mlp, train, {});
  const LassoModel lasso = manual_lasso(basis, {{0, 1.0}, {1, -0.8}}, 0.0);
  const PrnModel prn = build_prn(mlp, basis, lasso);

  const double decay = 1e-3;
  const double before = prn_objective(prn, train, decay);
  ScgConfig scg;
  scg.max_iterations = 200;
  const PrnModel retrained = retrain_prn(prn, train, decay, scg);
  const double after = prn_objective(retrained, train, decay);
  CHECK(after <= before + 1e-12);
}

TEST_CASE("a zero iteration budget leaves the model unchanged") {
  Rng rng(509);
  Fixture f = make_fixture(rng, 25);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 1.0}}, 0.3);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  ScgConfig scg;
  scg.max_iterations = 0;
  const PrnModel same = retrain_prn(prn, f.train, 1e-3, scg);
  CHECK(serialize_prn(same) == serialize_prn(prn));
}

TEST_CASE("weights shrink monotonically in the decay strength") {
  Rng rng(510);
  Dataset train = testutil::planted_dataset(100, 2, rng, [](const auto& row) {
    return 2.0 * row[0] + row[1];
  });
  MlpModel mlp = testutil::random_mlp(3, 2, rng);
  const PartialResponseBasis basis = build_design_matrix(mlp, train, {});
  const LassoModel lasso = manual_lasso(basis, {{0, 1.0}, {1, 1.0}}, 0.0);
  const PrnModel prn = build_prn(mlp, basis, lasso);

  auto weight_norm = [](const PrnModel& m) {
    double ss = 0.0;
    for (const auto& net : m.subnetworks) {
      ss += net.hidden_weights.squaredNorm() + net.hidden_bias.squaredNorm() +
            net.output_weights.squaredNorm() + net.output_bias * net.output_bias;
    }
    return std::sqrt(ss);
  };
  ScgConfig scg;
  scg.max_iterations = 400;
  const double n_small = weight_norm(retrain_prn(prn, train, 1e-3, scg));
  const double n_mid = weight_norm(retrain_prn(prn, train, 1.0, scg));
  const double n_big = weight_norm(retrain_prn(prn, train, 1e3, scg));
  CHECK(n_small >= n_mid);
  CHECK(n_mid >= n_big);
  CHECK(n_big < 0.1);
}

TEST_CASE("recenter zeroes anchor contributions and preserves the forward map") {
  Rng rng(511);
  Fixture f = make_fixture(rng, 40);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 0.9}, {2, -0.4}, {5, 0.7}}, 0.2);
  PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  ScgConfig scg;
  scg.max_iterations = 50;
  prn = retrain_prn(prn, f.train, 1e-3, scg);  // knocks contributions off anchor

  const PrnModel centered = recenter(prn);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  for (const auto& net : centered.subnetworks)
    CHECK(std::abs(subnetwork_value(net, zero)) < 1e-10);

  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = rng.gaussian();
    CHECK(prn_forward(centered, x).logit ==
          doctest::Approx(prn_forward(prn, x).logit).epsilon(1e-12));
  }

  // idempotent
  const PrnModel again = recenter(centered);
  CHECK(std::abs(again.global_bias - centered.global_bias) < 1e-12);
  for (std::size_t s = 0; s < again.subnetworks.size(); ++s)
    CHECK(std::abs(again.subnetworks[s].output_bias -
                   centered.subnetworks[s].output_bias) < 1e-12);
}

TEST_CASE("identity reweighting is a no-op") {
  Rng rng(512);
  Fixture f = make_fixture(rng, 25);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 1.1}, {1, -0.6}}, 0.4);
  const PrnModel prn = build_prn(f.mlp, f.basis, lasso);

  LassoModel identity;
  identity.intercept = prn.global_bias;
  identity.coefficients = Eigen::VectorXd::Ones(
      static_cast<Eigen::Index>(prn.subnetworks.size()));
  const PrnModel same = apply_reweighting(prn, identity);
  REQUIRE(same.subnetworks.size() == prn.subnetworks.size());
  CHECK(same.global_bias == prn.global_bias);
  for (std::size_t s = 0; s < prn.subnetworks.size(); ++s) {
    CHECK(same.subnetworks[s].output_weights == prn.subnetworks[s].output_weights);
    CHECK(same.subnetworks[s].output_bias == prn.subnetworks[s].output_bias);
  }
}

TEST_CASE("relasso drops a pure-noise subnetwork and keeps the signal") {
  Rng rng(513);
  // signal through x0; x1 is noise
  Dataset train = testutil::planted_dataset(300, 2, rng, [](const auto& row) {
    return 2.5 * row[0];
  });
  MlpModel mlp = testutil::random_mlp(3, 2, rng);
  const PartialResponseBasis basis = build_design_matrix(mlp, train, {});
  const LassoModel lasso = manual_lasso(basis, {{0, 1.0}, {1, 1.0}}, 0.0);
  PrnModel prn = build_prn(mlp, basis, lasso);
  ScgConfig scg;
  scg.max_iterations = 300;
  prn = recenter(retrain_prn(prn, train, 1e-3, scg));

  const RelassoResult result = relasso(prn, train, 5, 17);
  CHECK(!result.all_terms_dropped);
  bool has_x0 = false, has_x1 = false;
  for (const auto& net : result.model.subnetworks) {
    if (net.input_indices == std::vector<Eigen::Index>{0}) has_x0 = true;
    if (net.input_indices == std::vector<Eigen::Index>{1}) has_x1 = true;
  }
  CHECK(has_x0);
  CHECK(!has_x1);
}

TEST_CASE("serialization round-trips exactly") {
  Rng rng(514);
  Fixture f = make_fixture(rng, 20);
  const LassoModel lasso = manual_lasso(f.basis, {{0, 0.8}, {5, -0.9}}, 0.33);
  PrnModel prn = build_prn(f.mlp, f.basis, lasso);
  prn.source.seed = 123;

  const PrnModel back = deserialize_prn(serialize_prn(prn));
  CHECK(back.input_count == prn.input_count);
  CHECK(back.global_bias == prn.global_bias);
  CHECK(back.source.mlp_hash == prn.source.mlp_hash);
  CHECK(back.source.seed == 123);
  REQUIRE(back.subnetworks.size() == prn.subnetworks.size());
  for (std::size_t s = 0; s < prn.subnetworks.size(); ++s) {
    CHECK(back.subnetworks[s].name == prn.subnetworks[s].name);
    CHECK(back.subnetworks[s].input_indices == prn.subnetworks[s].input_indices);
    CHECK(back.subnetworks[s].hidden_weights == prn.subnetworks[s].hidden_weights);
    CHECK(back.subnetworks[s].hidden_bias == prn.subnetworks[s].hidden_bias);
    CHECK(back.subnetworks[s].output_weights == prn.subnetworks[s].output_weights);
    CHECK(back.subnetworks[s].output_bias == prn.subnetworks[s].output_bias);
  }
}

}  // TEST_SUITE
