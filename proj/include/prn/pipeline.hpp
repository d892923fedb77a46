// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prn/anova.hpp"
#include "prn/ard.hpp"
#include "prn/dataset.hpp"
#include "prn/eval.hpp"
#include "prn/lasso.hpp"
#include "prn/prn.hpp"

namespace prn {

struct PipelineConfig {
  std::string manifest_path;
  Eigen::Index hidden = 8;
  ScgConfig scg;  // per evidence cycle
  ArdConfig ard;
  PairPolicy pair_policy;
  LassoConfig lasso;
  double lambda_override = -1.0;  // >= 0 replaces cross-validated selection
  double retrain_decay = 1e-3;
  ScgConfig retrain_scg = {.max_iterations = 400};
  bool run_relasso = true;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<Eigen::Index> restrict_features;  // empty = all inputs
  std::string output_dir;  // empty = no artifacts written
  int jobs = 0;            // parallel seed slots; 0 = hardware concurrency
  bool export_nomograms = true;
  double cutpoint = 0.5;
};

// Everything one seed produced; models stay in memory so callers can
// inspect them without reparsing artifacts.
struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  MlpModel mlp;
  ArdState ard_state;
  PrnModel prn;        // retrained + recentered
  PrnModel prn_final;  // after the second Lasso when enabled, else == prn
  double chosen_lambda = 0.0;

  std::vector<std::string> selected_terms;  // first Lasso
  std::vector<std::string> final_terms;     // deliverable model's subnetworks

  EvalReport mlp_eval;
  EvalReport prn_eval;
  EvalReport prn_lasso_eval;  // of prn_final
  McNemarResult prn_vs_mlp;
};

struct AggregateStats {
  double mean = 0.0;
  double sd = 0.0;
};

struct BenchReport {
  std::string dataset;
  std::vector<SeedOutcome> outcomes;
  AggregateStats mlp_auroc, prn_auroc, prn_lasso_auroc;
  std::map<std::string, int> term_frequency;     // term name -> #seeds selected
  std::map<std::string, int> feature_frequency;  // feature name -> #seeds present
  int seeds_succeeded = 0;
};

// Steps i-vi for one seed on already-prepared data.
SeedOutcome run_single_seed(const PipelineConfig& config, const PreparedData& data,
                            std::uint64_t seed);

// Full run: prepare data once, execute seeds (in parallel worker slots),
// write per-seed artifacts and the aggregate report when output_dir is set.
BenchReport run_pipeline(const PipelineConfig& config);

// Per-record explanation in original data units.
struct Explanation {
  double probability = 0.0;
  double logit = 0.0;
  double global_bias = 0.0;
  std::vector<std::pair<std::string, double>> contributions;  // sorted by |value| desc
};

Explanation explain_record(const PrnModel& model, const NormalizationSpec& norm,
                           const Eigen::VectorXd& record_original_units);

std::string explanation_to_json(const Explanation& explanation);
std::string eval_report_to_json(const EvalReport& report);

// Lower-level artifact writers shared by the CLI subcommands.
void write_ard_report_csv(const std::string& path, const ArdTrainResult& result,
                          const std::vector<std::string>& feature_names);
void write_basis_files(const std::string& csv_path, const std::string& json_path,
                       const PartialResponseBasis& basis, const Eigen::VectorXd& targets);
PartialResponseBasis read_basis_files(const std::string& csv_path,
                                      const std::string& json_path,
                                      Eigen::VectorXd* targets = nullptr);
void write_lasso_path_csv(const std::string& path, const LassoPath& lasso_path);
void write_lasso_model_json(const std::string& path, const LassoModel& model,
                            const std::vector<AnovaTerm>& terms);
LassoModel read_lasso_model_json(const std::string& path);

}  // namespace prn
