// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "prn/io.hpp"
#include "prn/nomogram.hpp"

namespace prn {

namespace {

using nlohmann::json;

Eigen::VectorXd hard_predictions(const Eigen::VectorXd& scores, double cutpoint) {
  Eigen::VectorXd out(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    out[i] = scores[i] >= cutpoint ? 1.0 : 0.0;
  return out;
}

// Warm-started descent along the standard geometric grid down to the
// requested lambda; direct cold fits at small lambda are poorly conditioned.
LassoModel fit_at_lambda(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                         double lambda, const LassoConfig& config) {
  const double top = lambda_max(design, targets);
  LassoModel warm;
  bool have_warm = false;
  double current = top;
  while (current > lambda && current > 0.0) {
    warm = fit_lasso(design, targets, current, config, have_warm ? &warm : nullptr);
    have_warm = true;
    current *= 0.7;
  }
  return fit_lasso(design, targets, lambda, config, have_warm ? &warm : nullptr);
}

json eval_to_json(const EvalReport& r) {
  return json{{"auroc", r.auroc},
              {"ci_lo", r.ci_lo},
              {"ci_hi", r.ci_hi},
              {"cutpoint", r.cutpoint},
              {"tp", r.confusion.tp},
              {"fp", r.confusion.fp},
              {"tn", r.confusion.tn},
              {"fn", r.confusion.fn},
              {"n_test", r.n_test}};
}

AggregateStats stats_of(const std::vector<double>& values) {
  AggregateStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void write_seed_artifacts(const PipelineConfig& config, const PreparedData& data,
                          const SeedOutcome& outcome, const ArdTrainResult& ard_result,
                          const PartialResponseBasis& basis, const LassoPath* path,
                          const LassoModel& chosen, const PrnModel& initial_prn,
                          const std::string& dir) {
  write_text_file(dir + "/mlp.txt", serialize_mlp(outcome.mlp));
  write_ard_report_csv(dir + "/ard_report.csv", ard_result, data.train.feature_names);
  write_basis_files(dir + "/basis.csv", dir + "/basis.json", basis, data.train.targets);
  if (path) write_lasso_path_csv(dir + "/lasso_path.csv", *path);
  write_lasso_model_json(dir + "/lasso_chosen.json", chosen, basis.terms);
  write_text_file(dir + "/prn_initial.txt", serialize_prn(initial_prn));
  write_text_file(dir + "/prn_retrained.txt", serialize_prn(outcome.prn));
  write_text_file(dir + "/prn_final.txt", serialize_prn(outcome.prn_final));

  json report;
  report["dataset"] = data.train.name;
  report["seed"] = outcome.seed;
  report["chosen_lambda"] = outcome.chosen_lambda;
  report["selected_terms"] = outcome.selected_terms;
  report["final_terms"] = outcome.final_terms;
  report["mlp"] = eval_to_json(outcome.mlp_eval);
  report["prn"] = eval_to_json(outcome.prn_eval);
  report["prn_lasso"] = eval_to_json(outcome.prn_lasso_eval);
  report["mcnemar_prn_vs_mlp"] = json{{"b", outcome.prn_vs_mlp.b},
                                      {"c", outcome.prn_vs_mlp.c},
                                      {"statistic", outcome.prn_vs_mlp.statistic},
                                      {"p_value", outcome.prn_vs_mlp.p_value},
                                      {"note", outcome.prn_vs_mlp.note}};
  write_text_file(dir + "/eval.json", report.dump(2) + "\n");

  if (config.export_nomograms) {
    const NomogramExport nomogram =
        build_nomogram(outcome.prn_final, data.norm, data.train);
    write_nomogram_files(nomogram, dir + "/nomogram");
    // pre-retraining responses (the original MLP's partial responses scaled
    // by their Lasso coefficients), for side-by-side comparison
    if (!initial_prn.subnetworks.empty())
      write_nomogram_files(build_nomogram(initial_prn, data.norm, data.train),
                           dir + "/nomogram_initial");
  }
}

}  // namespace

SeedOutcome run_single_seed(const PipelineConfig& config, const PreparedData& data,
                            std::uint64_t seed) {
  SeedOutcome outcome;
  outcome.seed = seed;

  // i. fit the regularized MLP under the evidence framework
  ArdTrainResult ard_result =
      train_ard(data.train, config.hidden, seed, config.scg, config.ard);
  outcome.mlp = ard_result.model;
  outcome.ard_state = ard_result.state;

  // ii. materialize the partial-response design matrix
  const Eigen::Index d = data.train.cols();
  Eigen::VectorXd relevance = group_sum_squares(outcome.mlp).head(d).array() /
                              outcome.ard_state.alphas.head(d).array();
  PartialResponseBasis basis =
      build_design_matrix(outcome.mlp, data.train, config.pair_policy, relevance);
  if (!config.restrict_features.empty())
    basis = restrict_basis(basis, config.restrict_features);

  // iii. logistic Lasso term selection
  LassoPath path;
  LassoModel chosen;
  bool have_path = false;
  if (config.lambda_override >= 0.0) {
    chosen = fit_at_lambda(basis.design, data.train.targets, config.lambda_override,
                           config.lasso);
  } else {
    path = path_and_select(basis.design, data.train.targets, config.lasso.folds, seed,
                           config.lasso);
    chosen = path.models[static_cast<std::size_t>(path.chosen_index)];
    have_path = true;
  }
  outcome.chosen_lambda = chosen.lambda;
  for (Eigen::Index t : chosen.selected)
    outcome.selected_terms.push_back(basis.terms[static_cast<std::size_t>(t)].name);

  // iv. replicate the selection as a structured network
  PrnModel initial = build_prn(outcome.mlp, basis, chosen);
  initial.source.seed = seed;

  // v. retrain and re-anchor
  if (initial.subnetworks.empty()) {
    outcome.error = "empty selection: intercept-only model";
    outcome.prn = initial;
  } else {
    outcome.prn =
        recenter(retrain_prn(initial, data.train, config.retrain_decay, config.retrain_scg));
  }

  // vi. optional second Lasso over the retrained responses
  if (config.run_relasso && !outcome.prn.subnetworks.empty()) {
    RelassoResult second =
        relasso(outcome.prn, data.train, config.lasso.folds, seed, config.lasso);
    outcome.prn_final = second.model;
    if (second.all_terms_dropped)
      outcome.error = "second lasso dropped every term: intercept-only model";
  } else {
    outcome.prn_final = outcome.prn;
  }
  for (const auto& net : outcome.prn_final.subnetworks)
    outcome.final_terms.push_back(net.name);

  // evaluation on the held-out split
  const Eigen::VectorXd mlp_scores = forward_batch(outcome.mlp, data.test.features);
  const Eigen::VectorXd prn_scores = prn_forward_batch(outcome.prn, data.test.features);
  const Eigen::VectorXd final_scores =
      prn_forward_batch(outcome.prn_final, data.test.features);
  outcome.mlp_eval = evaluate(mlp_scores, data.test.targets, config.cutpoint);
  outcome.prn_eval = evaluate(prn_scores, data.test.targets, config.cutpoint);
  outcome.prn_lasso_eval = evaluate(final_scores, data.test.targets, config.cutpoint);
  outcome.prn_vs_mlp = mcnemar(hard_predictions(prn_scores, config.cutpoint),
                               hard_predictions(mlp_scores, config.cutpoint),
                               data.test.targets);
  outcome.ok = true;

  if (!config.output_dir.empty()) {
    const std::string dir = config.output_dir + "/seed_" + std::to_string(seed);
    write_seed_artifacts(config, data, outcome, ard_result, basis,
                         have_path ? &path : nullptr, chosen, initial, dir);
  }
  return outcome;
}

BenchReport run_pipeline(const PipelineConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("pipeline: no seeds given");
  const DatasetManifest manifest = load_manifest(config.manifest_path);
  const PreparedData data = prepare(manifest);

  BenchReport report;
  report.dataset = manifest.name;
  report.outcomes.resize(config.seeds.size());

  const int requested = config.jobs > 0
                            ? config.jobs
                            : static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min<int>(requested,
                                                static_cast<int>(config.seeds.size())));

  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= config.seeds.size()) return;
      try {
        report.outcomes[k] = run_single_seed(config, data, config.seeds[k]);
      } catch (const std::exception& e) {
        report.outcomes[k].seed = config.seeds[k];
        report.outcomes[k].ok = false;
        report.outcomes[k].error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<double> mlp_a, prn_a, lasso_a;
  for (const auto& outcome : report.outcomes) {
    if (!outcome.ok) continue;
    ++report.seeds_succeeded;
    mlp_a.push_back(outcome.mlp_eval.auroc);
    prn_a.push_back(outcome.prn_eval.auroc);
    lasso_a.push_back(outcome.prn_lasso_eval.auroc);
    std::set<std::string> seed_terms(outcome.final_terms.begin(),
                                     outcome.final_terms.end());
    for (const auto& term : seed_terms) ++report.term_frequency[term];
    std::set<std::string> seed_features;
    for (const auto& net : outcome.prn_final.subnetworks)
      for (Eigen::Index f : net.input_indices)
        seed_features.insert(data.train.feature_names[static_cast<std::size_t>(f)]);
    for (const auto& f : seed_features) ++report.feature_frequency[f];
  }
  report.mlp_auroc = stats_of(mlp_a);
  report.prn_auroc = stats_of(prn_a);
  report.prn_lasso_auroc = stats_of(lasso_a);

  if (!config.output_dir.empty()) {
    std::ostringstream csv;
    csv << "seed,variant,auroc,ci_lo,ci_hi,n_terms,ok\n";
    for (const auto& o : report.outcomes) {
      auto row = [&](const char* variant, const EvalReport& r, std::size_t terms) {
        csv << o.seed << ',' << variant << ',' << format_double(r.auroc) << ','
            << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << ',' << terms
            << ',' << (o.ok ? 1 : 0) << '\n';
      };
      row("mlp", o.mlp_eval, 0);
      row("prn", o.prn_eval, o.prn.subnetworks.size());
      row("prn_lasso", o.prn_lasso_eval, o.prn_final.subnetworks.size());
    }
    write_text_file(config.output_dir + "/aggregate.csv", csv.str());

    json agg;
    agg["dataset"] = report.dataset;
    agg["seeds_requested"] = config.seeds.size();
    agg["seeds_succeeded"] = report.seeds_succeeded;
    agg["mlp"] = {{"auroc_mean", report.mlp_auroc.mean}, {"auroc_sd", report.mlp_auroc.sd}};
    agg["prn"] = {{"auroc_mean", report.prn_auroc.mean}, {"auroc_sd", report.prn_auroc.sd}};
    agg["prn_lasso"] = {{"auroc_mean", report.prn_lasso_auroc.mean},
                        {"auroc_sd", report.prn_lasso_auroc.sd}};
    agg["term_frequency"] = report.term_frequency;
    agg["feature_frequency"] = report.feature_frequency;
    json errors = json::array();
    for (const auto& o : report.outcomes)
      if (!o.error.empty())
        errors.push_back({{"seed", o.seed}, {"ok", o.ok}, {"error", o.error}});
    agg["notes"] = errors;
    write_text_file(config.output_dir + "/aggregate.json", agg.dump(2) + "\n");
  }
  return report;
}

Explanation explain_record(const PrnModel& model, const NormalizationSpec& norm,
                           const Eigen::VectorXd& record_original_units) {
  if (record_original_units.size() != model.input_count)
    throw std::invalid_argument("explain_record: record dimension mismatch");
  Eigen::VectorXd x(record_original_units.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    x[j] = norm.normalize_value(j, record_original_units[j]);

  const PrnForward fwd = prn_forward(model, x);
  Explanation out;
  out.probability = fwd.probability;
  out.logit = fwd.logit;
  out.global_bias = model.global_bias;
  for (std::size_t s = 0; s < model.subnetworks.size(); ++s)
    out.contributions.emplace_back(model.subnetworks[s].name,
                                   fwd.contributions[static_cast<Eigen::Index>(s)]);
  std::stable_sort(out.contributions.begin(), out.contributions.end(),
                   [](const auto& a, const auto& b) {
                     return std::abs(a.second) > std::abs(b.second);
                   });
  return out;
}

std::string explanation_to_json(const Explanation& explanation) {
  json j;
  j["probability"] = explanation.probability;
  j["logit"] = explanation.logit;
  j["global_bias"] = explanation.global_bias;
  j["contributions"] = json::array();
  for (const auto& [name, value] : explanation.contributions)
    j["contributions"].push_back({{"term", name}, {"logit_contribution", value}});
  return j.dump(2) + "\n";
}

std::string eval_report_to_json(const EvalReport& report) {
  return eval_to_json(report).dump(2) + "\n";
}

void write_ard_report_csv(const std::string& path, const ArdTrainResult& result,
                          const std::vector<std::string>& feature_names) {
  const Eigen::Index d = result.model.input_count();
  auto group_name = [&](Eigen::Index k) -> std::string {
    if (k < d) return feature_names[static_cast<std::size_t>(k)];
    if (k == d) return "hidden_bias";
    if (k == d + 1) return "output_weights";
    return "output_bias";
  };
  std::ostringstream csv;
  csv << "cycle,group,alpha,gamma,sum_squares\n";
  for (const auto& rec : result.history)
    for (Eigen::Index k = 0; k < rec.alphas.size(); ++k)
      csv << rec.cycle << ',' << group_name(k) << ',' << format_double(rec.alphas[k])
          << ',' << format_double(rec.gammas[k]) << ','
          << format_double(rec.sum_squares[k]) << '\n';
  write_text_file(path, csv.str());
}

void write_basis_files(const std::string& csv_path, const std::string& json_path,
                       const PartialResponseBasis& basis, const Eigen::VectorXd& targets) {
  std::ostringstream csv;
  csv << "target";
  for (const auto& term : basis.terms) csv << ',' << term.name;
  csv << '\n';
  for (Eigen::Index m = 0; m < basis.design.rows(); ++m) {
    csv << format_double(targets[m]);
    for (Eigen::Index t = 0; t < basis.design.cols(); ++t)
      csv << ',' << format_double(basis.design(m, t));
    csv << '\n';
  }
  write_text_file(csv_path, csv.str());

  json j;
  j["phi0"] = basis.phi0;
  j["terms"] = json::array();
  for (const auto& term : basis.terms) {
    json features = json::array();
    for (Eigen::Index f : term.features) features.push_back(f);
    j["terms"].push_back({{"name", term.name}, {"features", features}});
  }
  write_text_file(json_path, j.dump(2) + "\n");
}

PartialResponseBasis read_basis_files(const std::string& csv_path,
                                      const std::string& json_path,
                                      Eigen::VectorXd* targets) {
  PartialResponseBasis basis;
  const json j = json::parse(read_text_file(json_path));
  basis.phi0 = j.at("phi0").get<double>();
  for (const auto& term : j.at("terms")) {
    AnovaTerm t;
    t.name = term.at("name").get<std::string>();
    for (const auto& f : term.at("features")) t.features.push_back(f.get<Eigen::Index>());
    basis.terms.push_back(std::move(t));
  }

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(csv_path + ": empty basis csv");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != basis.terms.size() + 1)
      throw std::runtime_error(csv_path + ": column count mismatch");
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_double(fields[c]);
    rows.push_back(std::move(row));
  }
  basis.design.resize(static_cast<Eigen::Index>(rows.size()), basis.term_count());
  if (targets) targets->resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (targets) (*targets)[static_cast<Eigen::Index>(m)] = rows[m][0];
    for (Eigen::Index t = 0; t < basis.term_count(); ++t)
      basis.design(static_cast<Eigen::Index>(m), t) =
          rows[m][static_cast<std::size_t>(t + 1)];
  }
  return basis;
}

void write_lasso_path_csv(const std::string& path, const LassoPath& lasso_path) {
  std::ostringstream csv;
  csv << "lambda,active_terms,cv_deviance_mean,cv_deviance_se,chosen\n";
  for (std::size_t k = 0; k < lasso_path.lambdas.size(); ++k) {
    csv << format_double(lasso_path.lambdas[k]) << ','
        << lasso_path.models[k].selected.size() << ','
        << format_double(lasso_path.cv_mean[k]) << ','
        << format_double(lasso_path.cv_se[k]) << ','
        << (static_cast<Eigen::Index>(k) == lasso_path.chosen_index ? 1 : 0) << '\n';
  }
  write_text_file(path, csv.str());
}

void write_lasso_model_json(const std::string& path, const LassoModel& model,
                            const std::vector<AnovaTerm>& terms) {
  json j;
  j["lambda"] = model.lambda;
  j["intercept"] = model.intercept;
  j["coefficients"] = std::vector<double>(
      model.coefficients.data(), model.coefficients.data() + model.coefficients.size());
  j["selected"] = json::array();
  for (Eigen::Index t : model.selected)
    j["selected"].push_back({{"term", terms[static_cast<std::size_t>(t)].name},
                             {"beta", model.coefficients[t]}});
  write_text_file(path, j.dump(2) + "\n");
}

LassoModel read_lasso_model_json(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  LassoModel model;
  model.lambda = j.at("lambda").get<double>();
  model.intercept = j.at("intercept").get<double>();
  const auto coeffs = j.at("coefficients").get<std::vector<double>>();
  model.coefficients = Eigen::Map<const Eigen::VectorXd>(
      coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  for (Eigen::Index t = 0; t < model.coefficients.size(); ++t)
    if (model.coefficients[t] != 0.0) model.selected.push_back(t);
  return model;
}

}  // namespace prn
