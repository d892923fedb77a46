// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "prn/io.hpp"

namespace prn {

namespace {

void check_input(const MlpModel& model, const Eigen::Index got) {
  if (got != model.input_count())
    throw std::invalid_argument("input dimension " + std::to_string(got) +
                                " does not match model inputs " +
                                std::to_string(model.input_count()));
}

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

}  // namespace

Eigen::Index MlpModel::group_of(Eigen::Index p) const {
  const Eigen::Index h = hidden_count();
  const Eigen::Index d = input_count();
  if (p < h * d) return p % d;          // fan-out weights of input (p % d)
  p -= h * d;
  if (p < h) return d;                  // hidden biases
  p -= h;
  if (p < h) return d + 1;              // output weights
  return d + 2;                         // output bias
}

std::vector<Eigen::Index> MlpModel::group_sizes() const {
  const Eigen::Index h = hidden_count();
  const Eigen::Index d = input_count();
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(d + 3), h);
  sizes[static_cast<std::size_t>(d + 2)] = 1;
  return sizes;
}

Eigen::VectorXd MlpModel::to_parameters() const {
  const Eigen::Index h = hidden_count();
  const Eigen::Index d = input_count();
  Eigen::VectorXd p(parameter_count());
  for (Eigen::Index j = 0; j < h; ++j)
    p.segment(j * d, d) = weights.row(j).transpose();
  p.segment(h * d, h) = hidden_bias;
  p.segment(h * d + h, h) = output_weights;
  p[h * d + 2 * h] = output_bias;
  return p;
}

void MlpModel::from_parameters(const Eigen::VectorXd& params) {
  const Eigen::Index h = hidden_count();
  const Eigen::Index d = input_count();
  if (params.size() != parameter_count())
    throw std::invalid_argument("parameter vector size mismatch");
  for (Eigen::Index j = 0; j < h; ++j)
    weights.row(j) = params.segment(j * d, d).transpose();
  hidden_bias = params.segment(h * d, h);
  output_weights = params.segment(h * d + h, h);
  output_bias = params[h * d + 2 * h];
}

MlpModel make_mlp(Eigen::Index hidden, Eigen::Index inputs, Rng& rng) {
  if (hidden < 1 || inputs < 1)
    throw std::invalid_argument("mlp needs at least one hidden unit and one input");
  MlpModel m;
  m.weights.resize(hidden, inputs);
  m.hidden_bias.resize(hidden);
  m.output_weights.resize(hidden);
  const double sd1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double sd2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index j = 0; j < hidden; ++j) {
    for (Eigen::Index i = 0; i < inputs; ++i) m.weights(j, i) = rng.gaussian(0.0, sd1);
    m.hidden_bias[j] = rng.gaussian(0.0, sd1);
  }
  for (Eigen::Index j = 0; j < hidden; ++j) m.output_weights[j] = rng.gaussian(0.0, sd2);
  m.output_bias = rng.gaussian(0.0, sd2);
  return m;
}

double logit_output(const MlpModel& model, const Eigen::VectorXd& x) {
  check_input(model, x.size());
  const Eigen::VectorXd z = (model.weights * x + model.hidden_bias).array().tanh();
  return model.output_weights.dot(z) + model.output_bias;
}

double forward(const MlpModel& model, const Eigen::VectorXd& x) {
  return sigmoid(logit_output(model, x));
}

Eigen::VectorXd logit_batch(const MlpModel& model, const Eigen::MatrixXd& features) {
  check_input(model, features.cols());
  // z: N x h
  Eigen::MatrixXd z = ((features * model.weights.transpose()).rowwise() +
                       model.hidden_bias.transpose())
                          .array()
                          .tanh();
  return (z * model.output_weights).array() + model.output_bias;
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& features) {
  Eigen::VectorXd a = logit_batch(model, features);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = sigmoid(a[i]);
  return a;
}

ObjectiveValue objective(const MlpModel& model, const Dataset& data,
                         const Eigen::VectorXd& alphas) {
  if (alphas.size() != model.group_count())
    throw std::invalid_argument("one alpha per weight group required");
  const Eigen::VectorXd y = forward_batch(model, data.features);
  double ce = 0.0;
  for (Eigen::Index m = 0; m < y.size(); ++m) {
    const double p = clamp_prob(y[m]);
    ce -= data.targets[m] * std::log(p) + (1.0 - data.targets[m]) * std::log(1.0 - p);
  }
  const Eigen::VectorXd params = model.to_parameters();
  double pen = 0.0;
  for (Eigen::Index p = 0; p < params.size(); ++p)
    pen += 0.5 * alphas[model.group_of(p)] * params[p] * params[p];
  ObjectiveValue v;
  v.cross_entropy = ce;
  v.penalty = pen;
  v.total = ce + pen;
  return v;
}

Eigen::VectorXd gradient(const MlpModel& model, const Dataset& data,
                         const Eigen::VectorXd& alphas) {
  if (alphas.size() != model.group_count())
    throw std::invalid_argument("one alpha per weight group required");
  const Eigen::Index h = model.hidden_count();
  const Eigen::Index d = model.input_count();
  const Eigen::MatrixXd& x = data.features;

  // Hidden activations per row: N x h.
  Eigen::MatrixXd z = ((x * model.weights.transpose()).rowwise() +
                       model.hidden_bias.transpose())
                          .array()
                          .tanh();
  Eigen::VectorXd y = (z * model.output_weights).array() + model.output_bias;
  Eigen::VectorXd delta(y.size());  // dS_w/da = y - t
  for (Eigen::Index m = 0; m < y.size(); ++m)
    delta[m] = sigmoid(y[m]) - data.targets[m];

  // back through hidden layer: per row, db_j = delta * v_j * (1 - z_j^2)
  Eigen::MatrixXd dhidden =
      (z.array().square() * -1.0 + 1.0).colwise() * delta.array();  // N x h
  dhidden = dhidden.array().rowwise() * model.output_weights.transpose().array();

  Eigen::VectorXd g(model.parameter_count());
  // first-layer weights: dW = dhidden^T * x  (h x d)
  Eigen::MatrixXd dW = dhidden.transpose() * x;
  for (Eigen::Index j = 0; j < h; ++j) g.segment(j * d, d) = dW.row(j).transpose();
  g.segment(h * d, h) = dhidden.colwise().sum().transpose();
  g.segment(h * d + h, h) = z.transpose() * delta;
  g[h * d + 2 * h] = delta.sum();

  const Eigen::VectorXd params = model.to_parameters();
  for (Eigen::Index p = 0; p < params.size(); ++p)
    g[p] += alphas[model.group_of(p)] * params[p];
  return g;
}

std::string serialize_mlp(const MlpModel& model) {
  std::ostringstream out;
  out << "prn-mlp v1\n";
  out << "hidden " << model.hidden_count() << "\n";
  out << "inputs " << model.input_count() << "\n";
  out << "weights\n";
  for (Eigen::Index j = 0; j < model.hidden_count(); ++j) {
    for (Eigen::Index i = 0; i < model.input_count(); ++i) {
      if (i) out << ' ';
      out << format_double(model.weights(j, i));
    }
    out << '\n';
  }
  auto vec = [&](const char* tag, const Eigen::VectorXd& v) {
    out << tag << '\n';
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (j) out << ' ';
      out << format_double(v[j]);
    }
    out << '\n';
  };
  vec("hidden_bias", model.hidden_bias);
  vec("output_weights", model.output_weights);
  out << "output_bias\n" << format_double(model.output_bias) << '\n';
  return out.str();
}

MlpModel deserialize_mlp(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line))
      throw std::runtime_error("mlp file truncated");
    return trim(line);
  };
  if (next() != "prn-mlp v1") throw std::runtime_error("not a prn-mlp v1 file");

  auto scalar_after = [&](const std::string& tag) {
    const std::string l = next();
    if (l.rfind(tag, 0) != 0) throw std::runtime_error("expected '" + tag + "'");
    return parse_long(l.substr(tag.size()));
  };
  const Eigen::Index h = scalar_after("hidden");
  const Eigen::Index d = scalar_after("inputs");

  auto expect = [&](const std::string& tag) {
    if (next() != tag) throw std::runtime_error("expected '" + tag + "'");
  };
  auto read_row = [&](Eigen::Index count) {
    const auto fields = split_fields(next(), ' ');
    if (static_cast<Eigen::Index>(fields.size()) != count)
      throw std::runtime_error("mlp file: bad row length");
    Eigen::VectorXd v(count);
    for (Eigen::Index i = 0; i < count; ++i) v[i] = parse_double(fields[static_cast<std::size_t>(i)]);
    return v;
  };

  MlpModel m;
  m.weights.resize(h, d);
  expect("weights");
  for (Eigen::Index j = 0; j < h; ++j) m.weights.row(j) = read_row(d).transpose();
  expect("hidden_bias");
  m.hidden_bias = read_row(h);
  expect("output_weights");
  m.output_weights = read_row(h);
  expect("output_bias");
  m.output_bias = read_row(1)[0];
  return m;
}

std::uint64_t mlp_fingerprint(const MlpModel& model) {
  return fnv1a(serialize_mlp(model));
}

}  // namespace prn
