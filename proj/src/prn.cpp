// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/prn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "prn/io.hpp"

namespace prn {

namespace {

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

Eigen::MatrixXd branch_columns(const SubNetwork& net, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd x(features.rows(), net.fan_in());
  for (Eigen::Index c = 0; c < net.fan_in(); ++c)
    x.col(c) = features.col(net.input_indices[static_cast<std::size_t>(c)]);
  return x;
}

// Pack/unpack the trainable parameters: per subnetwork the hidden weights
// (column-major), hidden biases, output weights and output bias, then the
// global bias last.
Eigen::VectorXd pack_parameters(const PrnModel& model) {
  Eigen::VectorXd p(model.parameter_count());
  Eigen::Index at = 0;
  for (const auto& net : model.subnetworks) {
    p.segment(at, net.hidden_weights.size()) =
        Eigen::Map<const Eigen::VectorXd>(net.hidden_weights.data(),
                                          net.hidden_weights.size());
    at += net.hidden_weights.size();
    p.segment(at, net.hidden_bias.size()) = net.hidden_bias;
    at += net.hidden_bias.size();
    p.segment(at, net.output_weights.size()) = net.output_weights;
    at += net.output_weights.size();
    p[at++] = net.output_bias;
  }
  p[at++] = model.global_bias;
  return p;
}

void unpack_parameters(PrnModel& model, const Eigen::VectorXd& p) {
  Eigen::Index at = 0;
  for (auto& net : model.subnetworks) {
    Eigen::Map<Eigen::VectorXd>(net.hidden_weights.data(), net.hidden_weights.size()) =
        p.segment(at, net.hidden_weights.size());
    at += net.hidden_weights.size();
    net.hidden_bias = p.segment(at, net.hidden_bias.size());
    at += net.hidden_bias.size();
    net.output_weights = p.segment(at, net.output_weights.size());
    at += net.output_weights.size();
    net.output_bias = p[at++];
  }
  model.global_bias = p[at++];
}

}  // namespace

Eigen::Index PrnModel::parameter_count() const {
  Eigen::Index count = 1;  // global bias
  for (const auto& net : subnetworks)
    count += net.hidden_weights.size() + 2 * net.hidden_count() + 1;
  return count;
}

double subnetwork_value(const SubNetwork& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd sub(net.fan_in());
  for (Eigen::Index c = 0; c < net.fan_in(); ++c)
    sub[c] = x[net.input_indices[static_cast<std::size_t>(c)]];
  const Eigen::VectorXd z = (net.hidden_weights * sub + net.hidden_bias).array().tanh();
  return net.output_weights.dot(z) + net.output_bias;
}

Eigen::VectorXd subnetwork_response(const SubNetwork& net,
                                    const Eigen::MatrixXd& branch_inputs) {
  if (branch_inputs.cols() != net.fan_in())
    throw std::invalid_argument("subnetwork_response: branch input width mismatch");
  Eigen::MatrixXd z = ((branch_inputs * net.hidden_weights.transpose()).rowwise() +
                       net.hidden_bias.transpose())
                          .array()
                          .tanh();
  return (z * net.output_weights).array() + net.output_bias;
}

PrnForward prn_forward(const PrnModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.input_count)
    throw std::invalid_argument("prn_forward: input dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("prn_forward: non-finite input");
  PrnForward out;
  out.contributions.resize(static_cast<Eigen::Index>(model.subnetworks.size()));
  double total = model.global_bias;
  for (std::size_t s = 0; s < model.subnetworks.size(); ++s) {
    out.contributions[static_cast<Eigen::Index>(s)] =
        subnetwork_value(model.subnetworks[s], x);
    total += out.contributions[static_cast<Eigen::Index>(s)];
  }
  out.logit = total;
  out.probability = sigmoid(total);
  return out;
}

Eigen::VectorXd prn_logit_batch(const PrnModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.input_count)
    throw std::invalid_argument("prn_logit_batch: input dimension mismatch");
  Eigen::VectorXd logit = Eigen::VectorXd::Constant(features.rows(), model.global_bias);
  for (const auto& net : model.subnetworks)
    logit += subnetwork_response(net, branch_columns(net, features));
  return logit;
}

Eigen::VectorXd prn_forward_batch(const PrnModel& model, const Eigen::MatrixXd& features) {
  Eigen::VectorXd a = prn_logit_batch(model, features);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = sigmoid(a[i]);
  return a;
}

Eigen::MatrixXd prn_contributions_batch(const PrnModel& model,
                                        const Eigen::MatrixXd& features) {
  Eigen::MatrixXd out(features.rows(),
                      static_cast<Eigen::Index>(model.subnetworks.size()));
  for (std::size_t s = 0; s < model.subnetworks.size(); ++s)
    out.col(static_cast<Eigen::Index>(s)) = subnetwork_response(
        model.subnetworks[s], branch_columns(model.subnetworks[s], features));
  return out;
}

PrnModel build_prn(const MlpModel& mlp, const PartialResponseBasis& basis,
                   const LassoModel& lasso) {
  if (lasso.coefficients.size() != basis.term_count())
    throw std::invalid_argument("build_prn: lasso does not match basis terms");
  const Eigen::Index d = mlp.input_count();
  for (const auto& term : basis.terms)
    for (Eigen::Index f : term.features)
      if (f < 0 || f >= d)
        throw std::invalid_argument("build_prn: basis term references input " +
                                    std::to_string(f) + " outside the model");

  const double anchor = basis.phi0;
  // replicated output bias: scaled copies of (v0 - anchor) make every
  // subnetwork vanish at the all-zero input
  const double bias_core = mlp.output_bias - anchor;

  // Gather selected terms.
  std::map<Eigen::Index, double> uni_coeff;  // input -> beta_i
  struct PairTerm {
    Eigen::Index k, l;
    double beta;
    std::string name;
  };
  std::vector<PairTerm> pairs;
  for (Eigen::Index t = 0; t < basis.term_count(); ++t) {
    const double beta = lasso.coefficients[t];
    if (beta == 0.0) continue;
    const auto& term = basis.terms[static_cast<std::size_t>(t)];
    if (term.is_univariate())
      uni_coeff[term.features[0]] += beta;
    else
      pairs.push_back({term.features[0], term.features[1], beta, term.name});
  }

  // Effective univariate scaling: own coefficient minus every pair
  // coefficient the input participates in, since the coupled subnetwork
  // carries the joint response rather than the interaction alone. Inputs
  // touched only through a pair still get a subnetwork so retraining can
  // decouple the interaction later.
  std::map<Eigen::Index, double> effective = uni_coeff;
  for (const auto& pr : pairs) {
    effective.try_emplace(pr.k, 0.0);
    effective.try_emplace(pr.l, 0.0);
    effective[pr.k] -= pr.beta;
    effective[pr.l] -= pr.beta;
  }

  auto univariate_name = [&](Eigen::Index input) -> std::string {
    for (const auto& term : basis.terms)
      if (term.is_univariate() && term.features[0] == input) return term.name;
    return "x" + std::to_string(input);
  };

  PrnModel model;
  model.input_count = d;
  model.global_bias = lasso.intercept;
  model.source.mlp_hash = mlp_fingerprint(mlp);
  model.source.lambda = lasso.lambda;

  for (const auto& [input, coeff] : effective) {
    SubNetwork net;
    net.input_indices = {input};
    net.name = univariate_name(input);
    net.hidden_weights = mlp.weights.col(input);
    net.hidden_bias = mlp.hidden_bias;
    net.output_weights = coeff * mlp.output_weights;
    net.output_bias = coeff * bias_core;
    model.subnetworks.push_back(std::move(net));
  }
  for (const auto& pr : pairs) {
    SubNetwork net;
    net.input_indices = {pr.k, pr.l};
    net.name = pr.name;
    net.hidden_weights.resize(mlp.hidden_count(), 2);
    net.hidden_weights.col(0) = mlp.weights.col(pr.k);
    net.hidden_weights.col(1) = mlp.weights.col(pr.l);
    net.hidden_bias = mlp.hidden_bias;
    net.output_weights = pr.beta * mlp.output_weights;
    net.output_bias = pr.beta * bias_core;
    model.subnetworks.push_back(std::move(net));
  }
  return model;
}

double prn_objective(const PrnModel& model, const Dataset& train, double decay) {
  const Eigen::VectorXd y = prn_forward_batch(model, train.features);
  double ce = 0.0;
  for (Eigen::Index m = 0; m < y.size(); ++m) {
    const double p = clamp_prob(y[m]);
    ce -= train.targets[m] * std::log(p) +
          (1.0 - train.targets[m]) * std::log(1.0 - p);
  }
  const Eigen::VectorXd params = pack_parameters(model);
  // all subnetwork parameters are penalized; the trailing global bias is not
  const Eigen::Index sub = params.size() - 1;
  return ce + 0.5 * decay * params.head(sub).squaredNorm();
}

Eigen::VectorXd prn_gradient(const PrnModel& model, const Dataset& train, double decay) {
  const Eigen::VectorXd params = pack_parameters(model);
  Eigen::VectorXd grad(params.size());

  Eigen::VectorXd delta = prn_forward_batch(model, train.features) - train.targets;
  Eigen::Index at = 0;
  for (const auto& net : model.subnetworks) {
    const Eigen::MatrixXd x = branch_columns(net, train.features);
    Eigen::MatrixXd z = ((x * net.hidden_weights.transpose()).rowwise() +
                         net.hidden_bias.transpose())
                            .array()
                            .tanh();
    // dhidden(m, j) = delta_m * v_j * (1 - z_mj^2)
    Eigen::MatrixXd dhidden = (1.0 - z.array().square()).colwise() * delta.array();
    dhidden = dhidden.array().rowwise() * net.output_weights.transpose().array();

    Eigen::MatrixXd dhw = dhidden.transpose() * x;  // h x c
    Eigen::Map<Eigen::MatrixXd>(grad.data() + at, dhw.rows(), dhw.cols()) = dhw;
    at += dhw.size();
    grad.segment(at, net.hidden_bias.size()) = dhidden.colwise().sum().transpose();
    at += net.hidden_bias.size();
    grad.segment(at, net.output_weights.size()) = z.transpose() * delta;
    at += net.output_weights.size();
    grad[at++] = delta.sum();
  }
  grad[at++] = delta.sum();  // global bias

  grad.head(params.size() - 1) += decay * params.head(params.size() - 1);
  return grad;
}

PrnModel retrain_prn(const PrnModel& model, const Dataset& train, double decay,
                     const ScgConfig& scg) {
  if (decay < 0.0) throw std::invalid_argument("retrain_prn: negative decay");
  if (train.cols() != model.input_count)
    throw std::invalid_argument("retrain_prn: dataset does not match model inputs");
  PrnModel scratch = model;

  ObjectiveFn f = [&](const Eigen::VectorXd& p) {
    unpack_parameters(scratch, p);
    return prn_objective(scratch, train, decay);
  };
  GradientFn g = [&](const Eigen::VectorXd& p) {
    unpack_parameters(scratch, p);
    return prn_gradient(scratch, train, decay);
  };

  const ScgResult result = scg_minimize(f, g, pack_parameters(model), scg);
  PrnModel out = model;
  unpack_parameters(out, result.x);
  return out;
}

PrnModel recenter(const PrnModel& model) {
  PrnModel out = model;
  double shift = 0.0;
  for (auto& net : out.subnetworks) {
    const double at_anchor =
        net.output_weights.dot(net.hidden_bias.array().tanh().matrix()) +
        net.output_bias;
    net.output_bias -= at_anchor;
    shift += at_anchor;
  }
  out.global_bias += shift;
  return out;
}

PrnModel apply_reweighting(const PrnModel& model, const LassoModel& lasso) {
  if (lasso.coefficients.size() !=
      static_cast<Eigen::Index>(model.subnetworks.size()))
    throw std::invalid_argument("apply_reweighting: one coefficient per subnetwork");
  PrnModel out;
  out.input_count = model.input_count;
  out.global_bias = lasso.intercept;
  out.source = model.source;
  out.source.lambda = lasso.lambda;
  for (std::size_t s = 0; s < model.subnetworks.size(); ++s) {
    const double beta = lasso.coefficients[static_cast<Eigen::Index>(s)];
    if (beta == 0.0) continue;
    SubNetwork net = model.subnetworks[s];
    net.output_weights *= beta;
    net.output_bias *= beta;
    out.subnetworks.push_back(std::move(net));
  }
  return out;
}

RelassoResult relasso(const PrnModel& model, const Dataset& train, int folds,
                      std::uint64_t seed, const LassoConfig& config) {
  if (model.subnetworks.empty())
    throw std::invalid_argument("relasso: model has no subnetworks");
  const Eigen::MatrixXd design = prn_contributions_batch(model, train.features);
  RelassoResult out;
  out.path = path_and_select(design, train.targets, folds, seed, config);
  const LassoModel& chosen = out.path.models[static_cast<std::size_t>(out.path.chosen_index)];
  out.model = apply_reweighting(model, chosen);
  out.all_terms_dropped = out.model.subnetworks.empty();
  return out;
}

std::string serialize_prn(const PrnModel& model) {
  std::ostringstream out;
  out << "prn-model v1\n";
  out << "inputs " << model.input_count << "\n";
  out << "global_bias " << format_double(model.global_bias) << "\n";
  out << "provenance mlp_hash=" << model.source.mlp_hash
      << " lambda=" << format_double(model.source.lambda)
      << " seed=" << model.source.seed << "\n";
  out << "subnetworks " << model.subnetworks.size() << "\n";
  for (const auto& net : model.subnetworks) {
    out << "subnet " << net.name << "\n";
    out << "inputs";
    for (Eigen::Index i : net.input_indices) out << ' ' << i;
    out << "\nhidden " << net.hidden_count() << "\n";
    out << "hidden_weights\n";
    for (Eigen::Index j = 0; j < net.hidden_count(); ++j) {
      for (Eigen::Index c = 0; c < net.fan_in(); ++c) {
        if (c) out << ' ';
        out << format_double(net.hidden_weights(j, c));
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
    vec("hidden_bias", net.hidden_bias);
    vec("output_weights", net.output_weights);
    out << "output_bias\n" << format_double(net.output_bias) << '\n';
  }
  return out.str();
}

PrnModel deserialize_prn(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line)) throw std::runtime_error("prn file truncated");
    return trim(line);
  };
  if (next() != "prn-model v1") throw std::runtime_error("not a prn-model v1 file");

  PrnModel model;
  {
    const std::string l = next();
    if (l.rfind("inputs", 0) != 0) throw std::runtime_error("expected 'inputs'");
    model.input_count = parse_long(l.substr(6));
  }
  {
    const std::string l = next();
    if (l.rfind("global_bias", 0) != 0) throw std::runtime_error("expected 'global_bias'");
    model.global_bias = parse_double(l.substr(11));
  }
  {
    const std::string l = next();
    if (l.rfind("provenance", 0) != 0) throw std::runtime_error("expected 'provenance'");
    for (const auto& field : split_fields(l.substr(11), ' ')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
      if (key == "mlp_hash")
        model.source.mlp_hash = static_cast<std::uint64_t>(std::stoull(val));
      else if (key == "lambda")
        model.source.lambda = parse_double(val);
      else if (key == "seed")
        model.source.seed = static_cast<std::uint64_t>(std::stoull(val));
    }
  }
  long count = 0;
  {
    const std::string l = next();
    if (l.rfind("subnetworks", 0) != 0) throw std::runtime_error("expected 'subnetworks'");
    count = parse_long(l.substr(11));
  }

  auto read_row = [&](Eigen::Index n) {
    const auto fields = split_fields(next(), ' ');
    if (static_cast<Eigen::Index>(fields.size()) != n)
      throw std::runtime_error("prn file: bad row length");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = parse_double(fields[static_cast<std::size_t>(i)]);
    return v;
  };
  auto expect = [&](const std::string& tag) {
    if (next() != tag) throw std::runtime_error("prn file: expected '" + tag + "'");
  };

  for (long s = 0; s < count; ++s) {
    SubNetwork net;
    {
      const std::string l = next();
      if (l.rfind("subnet", 0) != 0) throw std::runtime_error("expected 'subnet'");
      net.name = trim(l.substr(6));
    }
    {
      const std::string l = next();
      if (l.rfind("inputs", 0) != 0) throw std::runtime_error("expected 'inputs'");
      for (const auto& f : split_fields(trim(l.substr(6)), ' '))
        net.input_indices.push_back(parse_long(f));
    }
    Eigen::Index h = 0;
    {
      const std::string l = next();
      if (l.rfind("hidden", 0) != 0) throw std::runtime_error("expected 'hidden'");
      h = parse_long(l.substr(6));
    }
    expect("hidden_weights");
    net.hidden_weights.resize(h, static_cast<Eigen::Index>(net.input_indices.size()));
    for (Eigen::Index j = 0; j < h; ++j)
      net.hidden_weights.row(j) = read_row(net.hidden_weights.cols()).transpose();
    expect("hidden_bias");
    net.hidden_bias = read_row(h);
    expect("output_weights");
    net.output_weights = read_row(h);
    expect("output_bias");
    net.output_bias = read_row(1)[0];
    model.subnetworks.push_back(std::move(net));
  }
  return model;
}

}  // namespace prn
