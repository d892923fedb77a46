// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
//
// Command-line front end for the partial response network pipeline. Each
// subcommand exposes one stage; `run` chains them for one or more seeds and
// `bench` is the multi-seed aggregate with per-term selection frequencies.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "prn/io.hpp"
#include "prn/nomogram.hpp"
#include "prn/pipeline.hpp"

namespace {

using namespace prn;

struct CommonFlags {
  std::string manifest;
  std::string out;
  PipelineConfig config;
  std::string seeds_text = "1";
  std::string features_text;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& field : split_fields(text, ',')) {
    const std::string t = trim(field);
    if (t.empty()) continue;
    const auto dots = t.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(static_cast<std::uint64_t>(parse_long(t)));
    } else {
      const long lo = parse_long(t.substr(0, dots));
      const long hi = parse_long(t.substr(dots + 2));
      for (long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (seeds.empty()) throw std::runtime_error("no seeds in '" + text + "'");
  return seeds;
}

std::vector<Eigen::Index> parse_feature_list(const std::string& text,
                                             const std::vector<std::string>& names) {
  std::vector<Eigen::Index> out;
  if (trim(text).empty()) return out;
  for (const auto& field : split_fields(text, ',')) {
    const std::string t = trim(field);
    if (t.empty()) continue;
    const auto by_name = std::find(names.begin(), names.end(), t);
    if (by_name != names.end()) {
      out.push_back(static_cast<Eigen::Index>(by_name - names.begin()));
    } else {
      out.push_back(parse_long(t));
    }
  }
  return out;
}

void add_pipeline_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--manifest", flags.manifest, "dataset manifest file")->required();
  cmd->add_option("--hidden", flags.config.hidden, "hidden units")->capture_default_str();
  cmd->add_option("--scg-iterations", flags.config.scg.max_iterations,
                  "SCG iterations per evidence cycle")->capture_default_str();
  cmd->add_option("--ard-cycles", flags.config.ard.max_cycles, "evidence cycles")->capture_default_str();
  cmd->add_option("--folds", flags.config.lasso.folds, "cross-validation folds")->capture_default_str();
  cmd->add_option("--lambda", flags.config.lambda_override,
                  "fixed lasso lambda (skips cross-validation)");
  cmd->add_option_function<std::string>(
         "--lasso-rule",
         [&flags](const std::string& rule) {
           if (rule == "one-se")
             flags.config.lasso.rule = SelectionRule::OneStandardError;
           else if (rule == "min-cv")
             flags.config.lasso.rule = SelectionRule::MinCv;
           else
             throw CLI::ValidationError("--lasso-rule must be one-se or min-cv");
         },
         "lambda choice: one-se (default) or min-cv");
  cmd->add_option("--decay", flags.config.retrain_decay, "retraining weight decay")->capture_default_str();
  cmd->add_option("--retrain-iterations", flags.config.retrain_scg.max_iterations,
                  "SCG iterations for retraining")->capture_default_str();
  cmd->add_flag_callback("--no-relasso",
                         [&flags]() { flags.config.run_relasso = false; },
                         "skip the second lasso pass");
  cmd->add_flag_callback("--no-nomograms",
                         [&flags]() { flags.config.export_nomograms = false; },
                         "skip nomogram exports");
  cmd->add_option("--features", flags.features_text,
                  "restrict terms to these features (names or indices)");
  cmd->add_option("--top-m", flags.config.pair_policy.top_m,
                  "pairable inputs when d exceeds the all-pairs limit")->capture_default_str();
  cmd->add_option("--jobs", flags.config.jobs, "parallel seed workers (0 = cores)")->capture_default_str();
  cmd->add_option("--cutpoint", flags.config.cutpoint, "classification cut-point")->capture_default_str();
}

int run_bench(CommonFlags& flags, bool default_ten_seeds) {
  if (flags.seeds_text == "1" && default_ten_seeds) flags.seeds_text = "1..10";
  flags.config.manifest_path = flags.manifest;
  flags.config.seeds = parse_seed_list(flags.seeds_text);
  flags.config.output_dir = flags.out;
  if (!flags.features_text.empty()) {
    const DatasetManifest manifest = load_manifest(flags.manifest);
    // resolve names against the post-ingest feature set
    const PreparedData data = prepare(manifest);
    flags.config.restrict_features =
        parse_feature_list(flags.features_text, data.train.feature_names);
  }

  const BenchReport report = run_pipeline(flags.config);
  std::printf("dataset %s: %d/%zu seeds succeeded\n", report.dataset.c_str(),
              report.seeds_succeeded, report.outcomes.size());
  std::printf("  MLP       AUROC %.4f (sd %.4f)\n", report.mlp_auroc.mean,
              report.mlp_auroc.sd);
  std::printf("  PRN       AUROC %.4f (sd %.4f)\n", report.prn_auroc.mean,
              report.prn_auroc.sd);
  std::printf("  PRN-Lasso AUROC %.4f (sd %.4f)\n", report.prn_lasso_auroc.mean,
              report.prn_lasso_auroc.sd);
  if (!report.term_frequency.empty()) {
    std::printf("  term selection frequency:\n");
    for (const auto& [term, count] : report.term_frequency)
      std::printf("    %-28s %d/%d\n", term.c_str(), count, report.seeds_succeeded);
  }
  for (const auto& outcome : report.outcomes)
    if (!outcome.error.empty())
      std::fprintf(stderr, "  seed %llu: %s\n",
                   static_cast<unsigned long long>(outcome.seed),
                   outcome.error.c_str());
  return report.seeds_succeeded == static_cast<int>(report.outcomes.size()) ? 0 : 1;
}

PrnModel load_prn(const std::string& path) { return deserialize_prn(read_text_file(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial response network pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed = 1;
  std::string mlp_path, prn_path, basis_csv, basis_json, lasso_json, record_text;
  std::string model_path;
  double lambda = -1.0;

  // --- full pipeline -------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "run the whole pipeline");
  add_pipeline_flags(cmd_run, flags);
  cmd_run->add_option("--out", flags.out, "output directory")->required();
  cmd_run->add_option("--seeds", flags.seeds_text, "seed list, e.g. 1,2,3 or 1..10")->capture_default_str();

  auto* cmd_bench = app.add_subcommand("bench", "multi-seed benchmark aggregate");
  add_pipeline_flags(cmd_bench, flags);
  cmd_bench->add_option("--out", flags.out, "output directory")->required();
  cmd_bench->add_option("--seeds", flags.seeds_text, "seed list (default 1..10)")->capture_default_str();

  // --- individual stages ---------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "fit the ARD-regularized MLP");
  add_pipeline_flags(cmd_train, flags);
  cmd_train->add_option("--seed", seed, "weight initialization seed")->capture_default_str();
  cmd_train->add_option("--out", flags.out, "output directory")->required();

  auto* cmd_decompose = app.add_subcommand("decompose", "partial-response design matrix");
  add_pipeline_flags(cmd_decompose, flags);
  cmd_decompose->add_option("--mlp", mlp_path, "trained MLP file")->required();
  cmd_decompose->add_option("--out", flags.out, "output directory")->required();

  auto* cmd_select = app.add_subcommand("select", "lasso term selection");
  cmd_select->add_option("--basis-csv", basis_csv)->required();
  cmd_select->add_option("--basis-json", basis_json)->required();
  cmd_select->add_option("--folds", flags.config.lasso.folds, "")->capture_default_str();
  cmd_select->add_option("--seed", seed, "fold seed")->capture_default_str();
  cmd_select->add_option("--lambda", lambda, "fixed lambda (skips cross-validation)");
  cmd_select->add_option("--out", flags.out, "output directory")->required();

  auto* cmd_build = app.add_subcommand("build", "replicate the selection as a PRN");
  cmd_build->add_option("--mlp", mlp_path)->required();
  cmd_build->add_option("--basis-csv", basis_csv)->required();
  cmd_build->add_option("--basis-json", basis_json)->required();
  cmd_build->add_option("--lasso", lasso_json)->required();
  cmd_build->add_option("--out", flags.out, "output PRN file")->required();

  auto* cmd_retrain = app.add_subcommand("retrain", "gradient-descent refinement");
  add_pipeline_flags(cmd_retrain, flags);
  cmd_retrain->add_option("--prn", prn_path)->required();
  cmd_retrain->add_option("--out", flags.out, "output PRN file")->required();

  auto* cmd_relasso = app.add_subcommand("relasso", "second lasso over PRN responses");
  add_pipeline_flags(cmd_relasso, flags);
  cmd_relasso->add_option("--prn", prn_path)->required();
  cmd_relasso->add_option("--seed", seed, "fold seed")->capture_default_str();
  cmd_relasso->add_option("--out", flags.out, "output directory")->required();

  auto* cmd_eval = app.add_subcommand("eval", "test-set evaluation of a model file");
  add_pipeline_flags(cmd_eval, flags);
  cmd_eval->add_option("--model", model_path, "MLP or PRN file")->required();
  cmd_eval->add_option("--out", flags.out, "output JSON (default stdout)");

  auto* cmd_export = app.add_subcommand("export", "nomogram CSV + SVG export");
  add_pipeline_flags(cmd_export, flags);
  cmd_export->add_option("--prn", prn_path)->required();
  cmd_export->add_option("--out", flags.out, "output directory")->required();

  auto* cmd_explain = app.add_subcommand("explain", "per-record contribution breakdown");
  add_pipeline_flags(cmd_explain, flags);
  cmd_explain->add_option("--prn", prn_path)->required();
  cmd_explain->add_option("--record", record_text,
                          "comma-separated feature values in original units")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) return run_bench(flags, false);
    if (cmd_bench->parsed()) return run_bench(flags, true);

    if (cmd_train->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const ArdTrainResult result =
          train_ard(data.train, flags.config.hidden, seed, flags.config.scg,
                    flags.config.ard);
      write_text_file(flags.out + "/mlp.txt", serialize_mlp(result.model));
      write_ard_report_csv(flags.out + "/ard_report.csv", result,
                           data.train.feature_names);
      std::ostringstream alphas;
      alphas << "group,alpha\n";
      for (Eigen::Index k = 0; k < result.state.alphas.size(); ++k)
        alphas << k << ',' << format_double(result.state.alphas[k]) << '\n';
      write_text_file(flags.out + "/ard_state.csv", alphas.str());
      std::printf("wrote %s/mlp.txt (%d evidence cycles)\n", flags.out.c_str(),
                  result.state.cycle);
      return 0;
    }

    if (cmd_decompose->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const MlpModel mlp = deserialize_mlp(read_text_file(mlp_path));
      Eigen::VectorXd relevance;  // ranking only matters for d > all-pairs limit
      if (data.train.cols() > flags.config.pair_policy.max_inputs_for_all) {
        // relevance = sum(w^2)/alpha with the alphas saved next to the MLP
        const std::string state_path =
            std::filesystem::path(mlp_path).parent_path() / "ard_state.csv";
        relevance = group_sum_squares(mlp).head(data.train.cols());
        std::istringstream in(read_text_file(state_path));
        std::string line;
        std::getline(in, line);  // header
        for (Eigen::Index k = 0; std::getline(in, line) && k < data.train.cols(); ++k) {
          const auto fields = split_fields(line, ',');
          relevance[k] /= parse_double(fields.at(1));
        }
      }
      PartialResponseBasis basis =
          build_design_matrix(mlp, data.train, flags.config.pair_policy, relevance);
      if (!flags.features_text.empty())
        basis = restrict_basis(basis, parse_feature_list(flags.features_text,
                                                         data.train.feature_names));
      write_basis_files(flags.out + "/basis.csv", flags.out + "/basis.json", basis,
                        data.train.targets);
      std::printf("wrote %s/basis.csv with %lld terms\n", flags.out.c_str(),
                  static_cast<long long>(basis.term_count()));
      return 0;
    }

    if (cmd_select->parsed()) {
      Eigen::VectorXd targets;
      const PartialResponseBasis basis = read_basis_files(basis_csv, basis_json, &targets);
      LassoModel chosen;
      if (lambda >= 0.0) {
        chosen = fit_lasso(basis.design, targets, lambda, flags.config.lasso);
      } else {
        const LassoPath path = path_and_select(basis.design, targets,
                                               flags.config.lasso.folds, seed,
                                               flags.config.lasso);
        write_lasso_path_csv(flags.out + "/lasso_path.csv", path);
        chosen = path.models[static_cast<std::size_t>(path.chosen_index)];
      }
      write_lasso_model_json(flags.out + "/lasso_chosen.json", chosen, basis.terms);
      std::printf("selected %zu of %lld terms at lambda %.6g\n", chosen.selected.size(),
                  static_cast<long long>(basis.term_count()), chosen.lambda);
      return 0;
    }

    if (cmd_build->parsed()) {
      const MlpModel mlp = deserialize_mlp(read_text_file(mlp_path));
      const PartialResponseBasis basis = read_basis_files(basis_csv, basis_json);
      const LassoModel lasso = read_lasso_model_json(lasso_json);
      const PrnModel prn = build_prn(mlp, basis, lasso);
      write_text_file(flags.out, serialize_prn(prn));
      std::printf("wrote %s with %zu subnetworks\n", flags.out.c_str(),
                  prn.subnetworks.size());
      return 0;
    }

    if (cmd_retrain->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const PrnModel prn = load_prn(prn_path);
      const PrnModel retrained = recenter(retrain_prn(
          prn, data.train, flags.config.retrain_decay, flags.config.retrain_scg));
      write_text_file(flags.out, serialize_prn(retrained));
      std::printf("wrote %s\n", flags.out.c_str());
      return 0;
    }

    if (cmd_relasso->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const PrnModel prn = load_prn(prn_path);
      const RelassoResult result =
          relasso(prn, data.train, flags.config.lasso.folds, seed, flags.config.lasso);
      write_text_file(flags.out + "/prn_final.txt", serialize_prn(result.model));
      write_lasso_path_csv(flags.out + "/relasso_path.csv", result.path);
      if (result.all_terms_dropped)
        std::fprintf(stderr, "warning: every term dropped, intercept-only model\n");
      std::printf("kept %zu subnetworks\n", result.model.subnetworks.size());
      return 0;
    }

    if (cmd_eval->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const std::string text = read_text_file(model_path);
      Eigen::VectorXd scores;
      if (text.rfind("prn-mlp", 0) == 0)
        scores = forward_batch(deserialize_mlp(text), data.test.features);
      else
        scores = prn_forward_batch(deserialize_prn(text), data.test.features);
      const EvalReport report = evaluate(scores, data.test.targets, flags.config.cutpoint);
      const std::string json = eval_report_to_json(report);
      if (flags.out.empty())
        std::fputs(json.c_str(), stdout);
      else
        write_text_file(flags.out, json);
      return 0;
    }

    if (cmd_export->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const PrnModel prn = load_prn(prn_path);
      const NomogramExport nomogram = build_nomogram(prn, data.norm, data.train);
      write_nomogram_files(nomogram, flags.out);
      std::printf("wrote %zu curves and %zu surfaces to %s\n", nomogram.curves.size(),
                  nomogram.surfaces.size(), flags.out.c_str());
      return 0;
    }

    if (cmd_explain->parsed()) {
      const PreparedData data = prepare(load_manifest(flags.manifest));
      const PrnModel prn = load_prn(prn_path);
      const auto fields = split_fields(record_text, ',');
      Eigen::VectorXd record(static_cast<Eigen::Index>(fields.size()));
      for (std::size_t i = 0; i < fields.size(); ++i)
        record[static_cast<Eigen::Index>(i)] = parse_double(fields[i]);
      const Explanation explanation = explain_record(prn, data.norm, record);
      std::fputs(explanation_to_json(explanation).c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
