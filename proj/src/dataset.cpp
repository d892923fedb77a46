// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "prn/io.hpp"
#include "prn/rng.hpp"

namespace prn {

namespace {

bool is_missing_token(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "?" || t == "NA" || t == "na" || t == "nan" ||
         t == "NaN";
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty vector");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double column_median(const Eigen::VectorXd& col) {
  return median_of(std::vector<double>(col.data(), col.data() + col.size()));
}

}  // namespace

void Dataset::validate() const {
  if (features.cols() < 1) throw std::runtime_error(name + ": no features");
  if (features.rows() < 2) throw std::runtime_error(name + ": fewer than 2 rows");
  if (targets.size() != features.rows())
    throw std::runtime_error(name + ": target/feature row mismatch");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw std::runtime_error(name + ": feature name count mismatch");
  if (!features.allFinite())
    throw std::runtime_error(name + ": non-finite feature value");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (targets[i] == 0.0)
      has0 = true;
    else if (targets[i] == 1.0)
      has1 = true;
    else
      throw std::runtime_error(name + ": target not in {0,1}");
  }
  if (!has0 || !has1) throw std::runtime_error(name + ": target not binary");
}

NormalizationMode parse_normalization_mode(const std::string& text) {
  if (text == "zscore-median") return NormalizationMode::ZScoreMedian;
  if (text == "range-minus1-1") return NormalizationMode::RangeSymmetric;
  if (text == "range-0-1") return NormalizationMode::RangeUnit;
  throw std::runtime_error("unknown normalization mode: " + text);
}

std::string to_string(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::ZScoreMedian: return "zscore-median";
    case NormalizationMode::RangeSymmetric: return "range-minus1-1";
    case NormalizationMode::RangeUnit: return "range-0-1";
  }
  return "?";
}

double NormalizationSpec::normalize_value(Eigen::Index j, double x) const {
  return (x - center[j]) / scale[j];
}

double NormalizationSpec::denormalize_value(Eigen::Index j, double x) const {
  return x * scale[j] + center[j];
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 LoadReport* report) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_fields(line, ',');
  for (auto& h : header) h = trim(h);

  // Resolve the target column by name, falling back to a numeric index.
  Eigen::Index target_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == target_column) target_idx = static_cast<Eigen::Index>(j);
  if (target_idx < 0) {
    try {
      target_idx = parse_long(target_column);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": target column '" + target_column +
                               "' not found");
    }
    if (target_idx < 0 || target_idx >= static_cast<Eigen::Index>(header.size()))
      throw std::runtime_error(path + ": target column index out of range");
  }

  const std::size_t ncol = header.size();
  std::vector<std::vector<double>> rows;
  Eigen::Index dropped_rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_fields(line, ',');
    if (cells.size() != ncol)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(ncol) +
                               " fields, got " + std::to_string(cells.size()));
    std::vector<double> row(ncol);
    bool missing = false;
    for (std::size_t j = 0; j < ncol; ++j) {
      if (is_missing_token(cells[j])) {
        missing = true;
        break;
      }
      double v = parse_double(cells[j]);
      if (!std::isfinite(v)) {
        missing = true;
        break;
      }
      row[j] = v;
    }
    if (missing) {
      ++dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2)
    throw std::runtime_error(path + ": fewer than 2 complete rows");

  // Coerce targets to {0,1}: accept 0/1 directly, otherwise map the two
  // distinct values low -> 0, high -> 1.
  std::set<double> distinct;
  for (const auto& r : rows) distinct.insert(r[target_idx]);
  if (distinct.size() != 2)
    throw std::runtime_error(path + ": target not binary (" +
                             std::to_string(distinct.size()) +
                             " distinct values)");
  const double lo = *distinct.begin();
  const double hi = *distinct.rbegin();

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Index> feat_cols;
  std::vector<std::string> dropped_columns;
  for (std::size_t j = 0; j < ncol; ++j) {
    if (static_cast<Eigen::Index>(j) == target_idx) continue;
    double mn = rows[0][j], mx = rows[0][j];
    for (const auto& r : rows) {
      mn = std::min(mn, r[j]);
      mx = std::max(mx, r[j]);
    }
    if (mx == mn)
      dropped_columns.push_back(header[j]);
    else
      feat_cols.push_back(static_cast<Eigen::Index>(j));
  }
  if (feat_cols.empty())
    throw std::runtime_error(path + ": all feature columns are constant");

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.features.resize(n, static_cast<Eigen::Index>(feat_cols.size()));
  ds.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < feat_cols.size(); ++k)
      ds.features(i, static_cast<Eigen::Index>(k)) = rows[i][feat_cols[k]];
    ds.targets[i] = rows[i][target_idx] == lo ? 0.0 : (rows[i][target_idx] == hi ? 1.0 : -1.0);
  }
  for (Eigen::Index c : feat_cols) ds.feature_names.push_back(header[c]);

  if (report) {
    report->dropped_rows = dropped_rows;
    report->dropped_columns = dropped_columns;
  }
  ds.validate();
  return ds;
}

std::pair<Dataset, NormalizationSpec> normalize(const Dataset& dataset,
                                                NormalizationMode mode) {
  dataset.validate();
  const Eigen::Index d = dataset.cols();
  NormalizationSpec spec;
  spec.mode = mode;
  spec.center.resize(d);
  spec.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col = dataset.features.col(j);
    spec.center[j] = column_median(col);
    switch (mode) {
      case NormalizationMode::ZScoreMedian: {
        const double mean = col.mean();
        const double var =
            (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
        spec.scale[j] = std::sqrt(var);
        break;
      }
      case NormalizationMode::RangeSymmetric:
        spec.scale[j] = (col.maxCoeff() - col.minCoeff()) / 2.0;
        break;
      case NormalizationMode::RangeUnit:
        spec.scale[j] = col.maxCoeff() - col.minCoeff();
        break;
    }
    if (!(spec.scale[j] > 0.0))
      throw std::runtime_error(dataset.name + ": zero-variance feature '" +
                               dataset.feature_names[j] +
                               "' must be dropped before normalization");
  }
  return {apply_normalization(spec, dataset), spec};
}

Dataset apply_normalization(const NormalizationSpec& spec, const Dataset& dataset) {
  if (spec.center.size() != dataset.cols())
    throw std::runtime_error("normalization spec dimension mismatch");
  Dataset out = dataset;
  out.features = (dataset.features.rowwise() - spec.center.transpose()).array().rowwise() /
                 spec.scale.transpose().array();
  return out;
}

Dataset denormalize(const NormalizationSpec& spec, const Dataset& dataset) {
  if (spec.center.size() != dataset.cols())
    throw std::runtime_error("normalization spec dimension mismatch");
  Dataset out = dataset;
  out.features = (dataset.features.array().rowwise() * spec.scale.transpose().array())
                     .rowwise() +
                 spec.center.transpose().array();
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  dataset.validate();
  const Eigen::Index n = dataset.rows();
  if (spec.train_size < 1 || spec.test_size < 1 ||
      spec.train_size + spec.test_size > n)
    throw std::runtime_error(dataset.name + ": infeasible split sizes " +
                             std::to_string(spec.train_size) + "/" +
                             std::to_string(spec.test_size) + " of " +
                             std::to_string(n));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (spec.strategy == SplitStrategy::SeededRandom) {
    Rng rng(spec.seed);
    rng.shuffle(order);
  }

  auto take = [&](Eigen::Index begin, Eigen::Index count, const char* tag) {
    Dataset part;
    part.name = dataset.name + "." + tag;
    part.feature_names = dataset.feature_names;
    part.features.resize(count, dataset.cols());
    part.targets.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      part.features.row(i) = dataset.features.row(order[static_cast<std::size_t>(begin + i)]);
      part.targets[i] = dataset.targets[order[static_cast<std::size_t>(begin + i)]];
    }
    return part;
  };

  Dataset train = take(0, spec.train_size, "train");
  Dataset test = take(spec.train_size, spec.test_size, "test");
  train.validate();
  test.validate();
  return {train, test};
}

DatasetManifest load_manifest(const std::string& path) {
  auto kv = read_key_value_file(path);
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error(path + ": missing manifest key '" + key + "'");
    return it->second;
  };
  DatasetManifest m;
  m.name = need("name");
  m.target_column = need("target");
  m.normalization = parse_normalization_mode(need("normalization"));
  const std::string strategy = need("split");
  if (strategy == "first-k")
    m.split.strategy = SplitStrategy::FirstK;
  else if (strategy == "seeded-random")
    m.split.strategy = SplitStrategy::SeededRandom;
  else
    throw std::runtime_error(path + ": unknown split strategy '" + strategy + "'");
  m.split.train_size = parse_long(need("train_size"));
  m.split.test_size = parse_long(need("test_size"));
  m.split.seed = static_cast<std::uint64_t>(parse_long(need("seed")));

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  m.csv_path = (base / need("csv")).string();
  return m;
}

PreparedData prepare(const DatasetManifest& manifest) {
  PreparedData out;
  Dataset all = load_csv(manifest.csv_path, manifest.target_column, &out.load_report);
  all.name = manifest.name;
  auto [train_raw, test_raw] = split(all, manifest.split);
  auto [train_norm, spec] = normalize(train_raw, manifest.normalization);
  out.train = std::move(train_norm);
  out.norm = spec;
  out.test = apply_normalization(spec, test_raw);
  return out;
}

}  // namespace prn
