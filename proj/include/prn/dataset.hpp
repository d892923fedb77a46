// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace prn {

// Tabular binary-classification data. Targets are exactly 0 or 1 and all
// feature values are finite once a Dataset has been constructed.
struct Dataset {
  std::string name;
  Eigen::MatrixXd features;  // N x d
  Eigen::VectorXd targets;   // N, each 0.0 or 1.0
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }

  void validate() const;  // throws if any invariant is broken
};

enum class NormalizationMode { ZScoreMedian, RangeSymmetric, RangeUnit };

NormalizationMode parse_normalization_mode(const std::string& text);
std::string to_string(NormalizationMode mode);

// Per-feature affine transform  normalized = (x - center) / scale.
// For every mode the training median maps to 0, which is the anchor point
// of the ANOVA decomposition downstream.
//   zscore-median:  scale = training sd
//   range [-1,1]:   scale = (max - min) / 2
//   range [0,1]:    scale = (max - min)
struct NormalizationSpec {
  NormalizationMode mode = NormalizationMode::ZScoreMedian;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  double normalize_value(Eigen::Index feature, double x) const;
  double denormalize_value(Eigen::Index feature, double x) const;
};

enum class SplitStrategy { FirstK, SeededRandom };

struct SplitSpec {
  Eigen::Index train_size = 0;
  Eigen::Index test_size = 0;
  SplitStrategy strategy = SplitStrategy::SeededRandom;
  std::uint64_t seed = 1;
};

// What load_csv dropped, for logging.
struct LoadReport {
  Eigen::Index dropped_rows = 0;
  std::vector<std::string> dropped_columns;
};

// Parses a comma-delimited numeric table with one header row. Empty cells
// and the tokens ? / NA / nan mark missing values; rows containing any are
// dropped. Constant feature columns are dropped and reported. The target
// column may be given by name or by 0-based index.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 LoadReport* report = nullptr);

// Stats are computed on the rows of `dataset` itself, so pass the training
// split. Use apply_normalization for held-out data.
std::pair<Dataset, NormalizationSpec> normalize(const Dataset& dataset,
                                                NormalizationMode mode);

Dataset apply_normalization(const NormalizationSpec& spec, const Dataset& dataset);
Dataset denormalize(const NormalizationSpec& spec, const Dataset& dataset);

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

// Dataset manifest: key-value text naming the CSV, target column,
// normalization mode and split. Paths are resolved against the manifest's
// directory.
struct DatasetManifest {
  std::string name;
  std::string csv_path;
  std::string target_column;
  NormalizationMode normalization = NormalizationMode::ZScoreMedian;
  SplitSpec split;
};

DatasetManifest load_manifest(const std::string& path);

// Convenience: load + split + normalize on train stats, apply to test.
struct PreparedData {
  Dataset train;
  Dataset test;
  NormalizationSpec norm;
  LoadReport load_report;
};

PreparedData prepare(const DatasetManifest& manifest);

}  // namespace prn
