// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include <doctest.h>

#include <set>

#include "prn/dataset.hpp"
#include "prn/io.hpp"
#include "prn/rng.hpp"
#include "testutil.hpp"

using namespace prn;

TEST_SUITE("dataset") {

TEST_CASE("load_csv parses, coerces targets and drops incomplete rows") {
  const std::string path = testutil::test_dir() + "/basic.csv";
  write_text_file(path,
                  "a,b,label\n"
                  "1.0,5.0,2\n"
                  "2.0,,4\n"       // missing -> dropped
                  "3.0,6.5,2\n"
                  "4.0,?,4\n"      // missing -> dropped
                  "5.0,7.0,4\n");
  LoadReport report;
  Dataset ds = load_csv(path, "label", &report);
  CHECK(ds.rows() == 3);
  CHECK(ds.cols() == 2);
  CHECK(report.dropped_rows == 2);
  // 2 -> 0, 4 -> 1
  CHECK(ds.targets[0] == 0.0);
  CHECK(ds.targets[1] == 0.0);
  CHECK(ds.targets[2] == 1.0);
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv drops constant columns with a report") {
  const std::string path = testutil::test_dir() + "/constant.csv";
  write_text_file(path,
                  "a,zeros,label\n"
                  "1,0,0\n"
                  "2,0,1\n"
                  "3,0,0\n");
  LoadReport report;
  Dataset ds = load_csv(path, "label", &report);
  CHECK(ds.cols() == 1);
  REQUIRE(report.dropped_columns.size() == 1);
  CHECK(report.dropped_columns[0] == "zeros");
}

TEST_CASE("load_csv rejects non-binary targets") {
  const std::string path = testutil::test_dir() + "/degenerate.csv";
  write_text_file(path,
                  "a,label\n"
                  "1,0\n"
                  "2,0\n");
  CHECK_THROWS_WITH_AS(load_csv(path, "label"), doctest::Contains("target not binary"),
                       std::runtime_error);

  const std::string path3 = testutil::test_dir() + "/threeway.csv";
  write_text_file(path3,
                  "a,label\n"
                  "1,0\n"
                  "2,1\n"
                  "3,2\n");
  CHECK_THROWS_AS(load_csv(path3, "label"), std::runtime_error);
}

TEST_CASE("load_csv resolves the target column by index") {
  const std::string path = testutil::test_dir() + "/byindex.csv";
  write_text_file(path, "c0,c1\n1,0\n2,1\n3,1\n");
  Dataset ds = load_csv(path, "1");
  CHECK(ds.cols() == 1);
  CHECK(ds.targets.sum() == 2.0);
}

TEST_CASE("normalize shifts the median to zero in every mode") {
  Dataset ds;
  ds.name = "toy";
  ds.features.resize(5, 2);
  ds.features << 1, 10, 2, 20, 3, 40, 4, 80, 5, 160;
  ds.targets.resize(5);
  ds.targets << 0, 1, 0, 1, 0;
  ds.feature_names = {"a", "b"};

  for (auto mode : {NormalizationMode::ZScoreMedian, NormalizationMode::RangeSymmetric,
                    NormalizationMode::RangeUnit}) {
    auto [norm, spec] = normalize(ds, mode);
    for (Eigen::Index j = 0; j < norm.cols(); ++j) {
      std::vector<double> col(norm.features.col(j).data(),
                              norm.features.col(j).data() + norm.rows());
      std::sort(col.begin(), col.end());
      CHECK(std::abs(col[2]) < 1e-12);  // odd length: middle order statistic
    }
  }
}

TEST_CASE("zscore-median gives unit training standard deviation") {
  Dataset ds;
  ds.name = "toy";
  ds.features.resize(3, 1);
  ds.features << 1, 2, 3;
  ds.targets.resize(3);
  ds.targets << 0, 1, 1;
  ds.feature_names = {"a"};
  auto [norm, spec] = normalize(ds, NormalizationMode::ZScoreMedian);
  // median 2 maps to 0, sd([1,2,3]) = 1
  CHECK(norm.features(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(norm.features(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(norm.features(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec.center[0] == 2.0);
}

TEST_CASE("range modes map the training span onto the target width") {
  Dataset ds;
  ds.name = "toy";
  ds.features.resize(4, 1);
  ds.features << 0, 1, 3, 10;
  ds.targets.resize(4);
  ds.targets << 0, 1, 0, 1;
  ds.feature_names = {"a"};

  auto [unit, uspec] = normalize(ds, NormalizationMode::RangeUnit);
  CHECK(unit.features.col(0).maxCoeff() - unit.features.col(0).minCoeff() ==
        doctest::Approx(1.0).epsilon(1e-12));
  auto [sym, sspec] = normalize(ds, NormalizationMode::RangeSymmetric);
  CHECK(sym.features.col(0).maxCoeff() - sym.features.col(0).minCoeff() ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("denormalize inverts normalization") {
  Rng rng(7);
  Dataset ds = testutil::random_dataset(40, 3, rng);
  for (auto mode : {NormalizationMode::ZScoreMedian, NormalizationMode::RangeSymmetric,
                    NormalizationMode::RangeUnit}) {
    auto [norm, spec] = normalize(ds, mode);
    Dataset back = denormalize(spec, norm);
    CHECK((back.features - ds.features).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("normalize refuses zero-variance features") {
  Dataset ds;
  ds.name = "toy";
  ds.features.resize(3, 1);
  ds.features << 2, 2, 2;
  ds.targets.resize(3);
  ds.targets << 0, 1, 1;
  ds.feature_names = {"flat"};
  CHECK_THROWS_AS(normalize(ds, NormalizationMode::ZScoreMedian), std::runtime_error);
}

TEST_CASE("split produces exact sizes and is a partition") {
  Rng rng(11);
  Dataset ds = testutil::random_dataset(50, 2, rng);
  // tag rows so we can recover index sets from the parts
  for (Eigen::Index i = 0; i < ds.rows(); ++i) ds.features(i, 0) = static_cast<double>(i);

  SplitSpec spec;
  spec.train_size = 30;
  spec.test_size = 20;
  spec.strategy = SplitStrategy::SeededRandom;
  spec.seed = 5;
  auto [train, test] = split(ds, spec);
  CHECK(train.rows() == 30);
  CHECK(test.rows() == 20);

  std::set<double> seen;
  for (Eigen::Index i = 0; i < train.rows(); ++i) seen.insert(train.features(i, 0));
  for (Eigen::Index i = 0; i < test.rows(); ++i) seen.insert(test.features(i, 0));
  CHECK(seen.size() == 50);  // no duplicates between the parts
}

TEST_CASE("split is deterministic given the seed") {
  Rng rng(13);
  Dataset ds = testutil::random_dataset(64, 3, rng);
  SplitSpec spec;
  spec.train_size = 40;
  spec.test_size = 24;
  spec.seed = 99;
  auto [a_train, a_test] = split(ds, spec);
  auto [b_train, b_test] = split(ds, spec);
  CHECK(a_train.features == b_train.features);
  CHECK(a_test.features == b_test.features);
}

TEST_CASE("first-k split preserves file order") {
  Rng rng(17);
  Dataset ds = testutil::random_dataset(10, 1, rng);
  for (Eigen::Index i = 0; i < ds.rows(); ++i) ds.features(i, 0) = static_cast<double>(i);
  ds.targets << 0, 1, 0, 1, 0, 1, 0, 1, 0, 1;
  SplitSpec spec;
  spec.train_size = 6;
  spec.test_size = 4;
  spec.strategy = SplitStrategy::FirstK;
  auto [train, test] = split(ds, spec);
  CHECK(train.features(0, 0) == 0.0);
  CHECK(train.features(5, 0) == 5.0);
  CHECK(test.features(0, 0) == 6.0);
}

TEST_CASE("split rejects infeasible sizes") {
  Rng rng(19);
  Dataset ds = testutil::random_dataset(10, 1, rng);
  SplitSpec spec;
  spec.train_size = 8;
  spec.test_size = 5;
  CHECK_THROWS_AS(split(ds, spec), std::runtime_error);
}

TEST_CASE("benchmark CSVs ingest to their documented shapes") {
  // these run only for datasets that have been fetched; wbc_diagnostic
  // ships with the repository
  struct Expectation {
    const char* manifest;
    Eigen::Index rows, cols;
    double prevalence;
  };
  const Expectation expected[] = {
      {"/wbc_diagnostic.manifest", 569, 30, 0.373},
      {"/pima.manifest", 532, 7, 0.357},
      {"/ionosphere.manifest", 351, 33, 0.641},
      {"/wbc_original.manifest", 683, 9, 0.350},
      {"/german.manifest", 1000, 24, 0.300},
  };
  int checked = 0;
  for (const auto& e : expected) {
    const std::string path = std::string(PRN_DATA_DIR) + e.manifest;
    if (!file_exists(path)) continue;
    const DatasetManifest manifest = load_manifest(path);
    if (!file_exists(manifest.csv_path)) {
      MESSAGE("skipping ", e.manifest, ": csv not fetched");
      continue;
    }
    Dataset ds = load_csv(manifest.csv_path, manifest.target_column);
    CHECK(ds.rows() == e.rows);
    CHECK(ds.cols() == e.cols);
    CHECK(ds.targets.mean() == doctest::Approx(e.prevalence).epsilon(0.01));
    ++checked;
  }
  CHECK(checked >= 1);  // wbc_diagnostic is always in the tree
}

TEST_CASE("manifest round-trips through prepare") {
  const std::string dir = testutil::test_dir();
  const std::string csv = dir + "/manifest_data.csv";
  std::ostringstream rows;
  rows << "f1,f2,y\n";
  Rng rng(23);
  for (int i = 0; i < 30; ++i)
    rows << format_double(rng.gaussian()) << ',' << format_double(rng.gaussian() * 3.0)
         << ',' << (i % 2) << '\n';
  write_text_file(csv, rows.str());
  write_text_file(dir + "/manifest_data.manifest",
                  "name = demo\n"
                  "csv = manifest_data.csv\n"
                  "target = y\n"
                  "normalization = zscore-median\n"
                  "split = seeded-random\n"
                  "train_size = 20\n"
                  "test_size = 10\n"
                  "seed = 3\n");
  DatasetManifest manifest = load_manifest(dir + "/manifest_data.manifest");
  CHECK(manifest.name == "demo");
  PreparedData data = prepare(manifest);
  CHECK(data.train.rows() == 20);
  CHECK(data.test.rows() == 10);
  // training medians are at the anchor
  for (Eigen::Index j = 0; j < data.train.cols(); ++j) {
    std::vector<double> col(data.train.features.col(j).data(),
                            data.train.features.col(j).data() + data.train.rows());
    std::sort(col.begin(), col.end());
    CHECK(std::abs(0.5 * (col[9] + col[10])) < 1e-12);
  }
}

}  // TEST_SUITE
