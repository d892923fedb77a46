// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "prn/dataset.hpp"
#include "prn/prn.hpp"

namespace prn {

// Exported contribution curve for a univariate subnetwork; values are in
// original data units so the plot reads like a nomogram axis.
struct NomogramCurve {
  std::string name;
  Eigen::Index feature = 0;
  Eigen::VectorXd values;        // 101-point grid, original units
  Eigen::VectorXd contribution;  // logit contribution at each grid point
  Eigen::VectorXd bin_edges;     // 21 edges, original units
  Eigen::VectorXi bin_counts;    // 20 training-data histogram bins
};

struct NomogramSurface {
  std::string name;
  Eigen::Index feature_row = 0, feature_col = 0;
  Eigen::VectorXd row_values;    // 41-point grid, original units
  Eigen::VectorXd col_values;
  Eigen::MatrixXd contribution;  // 41 x 41
};

struct NomogramExport {
  double global_bias = 0.0;
  std::vector<NomogramCurve> curves;
  std::vector<NomogramSurface> surfaces;
};

// Grids span the observed training range per feature; curves come straight
// from the subnetwork responses of a recentered model, so they are zero at
// the anchor point (the training median).
NomogramExport build_nomogram(const PrnModel& model, const NormalizationSpec& norm,
                              const Dataset& normalized_train);

// One CSV per term (plus a histogram CSV per curve), one SVG per term, and
// a JSON index listing terms, ranges and the global bias.
void write_nomogram_files(const NomogramExport& nomogram, const std::string& directory);

std::string render_curve_svg(const NomogramCurve& curve);
std::string render_surface_svg(const NomogramSurface& surface);

std::string sanitize_filename(const std::string& name);

}  // namespace prn
