// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/nomogram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "prn/io.hpp"

namespace prn {

namespace {

constexpr int kCurvePoints = 101;
constexpr int kSurfacePoints = 41;
constexpr int kHistogramBins = 20;

Eigen::VectorXd linspace(double lo, double hi, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

NomogramExport build_nomogram(const PrnModel& model, const NormalizationSpec& norm,
                              const Dataset& normalized_train) {
  NomogramExport out;
  out.global_bias = model.global_bias;

  for (const auto& net : model.subnetworks) {
    if (net.fan_in() == 1) {
      const Eigen::Index f = net.input_indices[0];
      const Eigen::VectorXd col = normalized_train.features.col(f);
      const double lo = col.minCoeff(), hi = col.maxCoeff();

      NomogramCurve curve;
      curve.name = net.name;
      curve.feature = f;
      const Eigen::VectorXd grid = linspace(lo, hi, kCurvePoints);
      curve.contribution = subnetwork_response(net, grid);
      curve.values.resize(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i)
        curve.values[i] = norm.denormalize_value(f, grid[i]);

      curve.bin_edges.resize(kHistogramBins + 1);
      curve.bin_counts = Eigen::VectorXi::Zero(kHistogramBins);
      const Eigen::VectorXd edges = linspace(lo, hi, kHistogramBins + 1);
      for (Eigen::Index i = 0; i <= kHistogramBins; ++i)
        curve.bin_edges[i] = norm.denormalize_value(f, edges[i]);
      for (Eigen::Index m = 0; m < col.size(); ++m) {
        int bin = static_cast<int>(std::floor((col[m] - lo) / (hi - lo) *
                                              static_cast<double>(kHistogramBins)));
        bin = std::clamp(bin, 0, kHistogramBins - 1);
        ++curve.bin_counts[bin];
      }
      out.curves.push_back(std::move(curve));
    } else {
      const Eigen::Index fr = net.input_indices[0], fc = net.input_indices[1];
      const Eigen::VectorXd ci = normalized_train.features.col(fr);
      const Eigen::VectorXd cj = normalized_train.features.col(fc);
      const Eigen::VectorXd gi = linspace(ci.minCoeff(), ci.maxCoeff(), kSurfacePoints);
      const Eigen::VectorXd gj = linspace(cj.minCoeff(), cj.maxCoeff(), kSurfacePoints);

      NomogramSurface surf;
      surf.name = net.name;
      surf.feature_row = fr;
      surf.feature_col = fc;
      surf.row_values.resize(kSurfacePoints);
      surf.col_values.resize(kSurfacePoints);
      for (int i = 0; i < kSurfacePoints; ++i) {
        surf.row_values[i] = norm.denormalize_value(fr, gi[i]);
        surf.col_values[i] = norm.denormalize_value(fc, gj[i]);
      }
      Eigen::MatrixXd branch(kSurfacePoints * kSurfacePoints, 2);
      for (int i = 0; i < kSurfacePoints; ++i)
        for (int j = 0; j < kSurfacePoints; ++j) {
          branch(i * kSurfacePoints + j, 0) = gi[i];
          branch(i * kSurfacePoints + j, 1) = gj[j];
        }
      const Eigen::VectorXd flat = subnetwork_response(net, branch);
      surf.contribution.resize(kSurfacePoints, kSurfacePoints);
      for (int i = 0; i < kSurfacePoints; ++i)
        for (int j = 0; j < kSurfacePoints; ++j)
          surf.contribution(i, j) = flat[i * kSurfacePoints + j];
      out.surfaces.push_back(std::move(surf));
    }
  }
  return out;
}

namespace {

struct Frame {
  double width = 640, height = 420;
  double left = 60, right = 20, top = 30, bottom = 40;

  double plot_width() const { return width - left - right; }
  double plot_height() const { return height - top - bottom; }
  double x(double t) const { return left + t * plot_width(); }    // t in [0,1]
  double y(double t) const { return top + (1.0 - t) * plot_height(); }
};

std::string svg_header(const Frame& f, const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
    << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height
    << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n";
  return s.str();
}

std::string axis_labels(const Frame& f, double xlo, double xhi, double ylo, double yhi) {
  std::ostringstream s;
  s << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">\n";
  s << "<text x=\"" << f.x(0.0) << "\" y=\"" << f.height - 8 << "\">" << format_double(xlo)
    << "</text>\n";
  s << "<text x=\"" << f.x(1.0) << "\" y=\"" << f.height - 8
    << "\" text-anchor=\"end\">" << format_double(xhi) << "</text>\n";
  s << "<text x=\"" << f.left - 6 << "\" y=\"" << f.y(0.0)
    << "\" text-anchor=\"end\">" << format_double(ylo) << "</text>\n";
  s << "<text x=\"" << f.left - 6 << "\" y=\"" << f.y(1.0) + 8
    << "\" text-anchor=\"end\">" << format_double(yhi) << "</text>\n";
  s << "</g>\n";
  s << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.plot_width()
    << "\" height=\"" << f.plot_height()
    << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  return s.str();
}

}  // namespace

std::string render_curve_svg(const NomogramCurve& curve) {
  Frame f;
  const double xlo = curve.values.minCoeff(), xhi = curve.values.maxCoeff();
  double ylo = std::min(0.0, curve.contribution.minCoeff());
  double yhi = std::max(0.0, curve.contribution.maxCoeff());
  if (yhi == ylo) yhi = ylo + 1.0;
  const double xspan = xhi > xlo ? xhi - xlo : 1.0;

  std::ostringstream s;
  s << svg_header(f, curve.name + " contribution to logit");

  // histogram along the floor, secondary scale
  const int maxcount = std::max(1, curve.bin_counts.maxCoeff());
  s << "<g fill=\"#c8d8ee\" stroke=\"none\">\n";
  for (Eigen::Index b = 0; b < curve.bin_counts.size(); ++b) {
    const double x0 = f.x((curve.bin_edges[b] - xlo) / xspan);
    const double x1 = f.x((curve.bin_edges[b + 1] - xlo) / xspan);
    const double frac = 0.3 * static_cast<double>(curve.bin_counts[b]) /
                        static_cast<double>(maxcount);
    s << "<rect x=\"" << x0 << "\" y=\"" << f.y(frac) << "\" width=\"" << (x1 - x0)
      << "\" height=\"" << f.y(0.0) - f.y(frac) << "\"/>\n";
  }
  s << "</g>\n";

  // zero line
  const double zero_t = (0.0 - ylo) / (yhi - ylo);
  if (zero_t >= 0.0 && zero_t <= 1.0)
    s << "<line x1=\"" << f.x(0.0) << "\" y1=\"" << f.y(zero_t) << "\" x2=\"" << f.x(1.0)
      << "\" y2=\"" << f.y(zero_t)
      << "\" stroke=\"#aaa\" stroke-dasharray=\"4 3\" stroke-width=\"1\"/>\n";

  s << "<polyline fill=\"none\" stroke=\"#b03030\" stroke-width=\"2\" points=\"";
  for (Eigen::Index i = 0; i < curve.values.size(); ++i) {
    const double tx = (curve.values[i] - xlo) / xspan;
    const double ty = (curve.contribution[i] - ylo) / (yhi - ylo);
    s << f.x(tx) << ',' << f.y(ty) << ' ';
  }
  s << "\"/>\n";
  s << axis_labels(f, xlo, xhi, ylo, yhi);
  s << "</svg>\n";
  return s.str();
}

std::string render_surface_svg(const NomogramSurface& surface) {
  Frame f;
  const double maxabs = std::max(1e-12, surface.contribution.cwiseAbs().maxCoeff());
  const Eigen::Index nr = surface.contribution.rows();
  const Eigen::Index nc = surface.contribution.cols();

  std::ostringstream s;
  s << svg_header(f, surface.name + " joint contribution to logit");
  const double cw = f.plot_width() / static_cast<double>(nc);
  const double ch = f.plot_height() / static_cast<double>(nr);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      const double t = surface.contribution(i, j) / maxabs;  // [-1, 1]
      // diverging blue-white-red
      int r, g, b;
      if (t >= 0) {
        r = 255;
        g = b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      } else {
        b = 255;
        r = g = static_cast<int>(std::lround(255.0 * (1.0 + t)));
      }
      const double x0 = f.left + static_cast<double>(j) * cw;
      const double y0 = f.top + f.plot_height() - static_cast<double>(i + 1) * ch;
      s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << cw
        << "\" height=\"" << ch << "\" fill=\"rgb(" << r << ',' << g << ',' << b
        << ")\"/>\n";
    }
  }
  s << axis_labels(f, surface.col_values.minCoeff(), surface.col_values.maxCoeff(),
                   surface.row_values.minCoeff(), surface.row_values.maxCoeff());
  s << "</svg>\n";
  return s.str();
}

void write_nomogram_files(const NomogramExport& nomogram, const std::string& directory) {
  nlohmann::json index;
  index["global_bias"] = nomogram.global_bias;
  index["terms"] = nlohmann::json::array();

  for (const auto& curve : nomogram.curves) {
    const std::string stem = directory + "/term_" + sanitize_filename(curve.name);
    std::ostringstream csv;
    csv << "value,contribution\n";
    for (Eigen::Index i = 0; i < curve.values.size(); ++i)
      csv << format_double(curve.values[i]) << ',' << format_double(curve.contribution[i])
          << '\n';
    write_text_file(stem + ".csv", csv.str());

    std::ostringstream hist;
    hist << "bin_low,bin_high,count\n";
    for (Eigen::Index b = 0; b < curve.bin_counts.size(); ++b)
      hist << format_double(curve.bin_edges[b]) << ',' << format_double(curve.bin_edges[b + 1])
           << ',' << curve.bin_counts[b] << '\n';
    write_text_file(stem + "_hist.csv", hist.str());
    write_text_file(stem + ".svg", render_curve_svg(curve));

    index["terms"].push_back({{"name", curve.name},
                              {"kind", "univariate"},
                              {"feature", curve.feature},
                              {"min", curve.values.minCoeff()},
                              {"max", curve.values.maxCoeff()}});
  }
  for (const auto& surface : nomogram.surfaces) {
    const std::string stem = directory + "/term_" + sanitize_filename(surface.name);
    std::ostringstream csv;
    csv << "value";
    for (Eigen::Index j = 0; j < surface.col_values.size(); ++j)
      csv << ',' << format_double(surface.col_values[j]);
    csv << '\n';
    for (Eigen::Index i = 0; i < surface.row_values.size(); ++i) {
      csv << format_double(surface.row_values[i]);
      for (Eigen::Index j = 0; j < surface.col_values.size(); ++j)
        csv << ',' << format_double(surface.contribution(i, j));
      csv << '\n';
    }
    write_text_file(stem + ".csv", csv.str());
    write_text_file(stem + ".svg", render_surface_svg(surface));

    index["terms"].push_back({{"name", surface.name},
                              {"kind", "bivariate"},
                              {"features", {surface.feature_row, surface.feature_col}},
                              {"row_min", surface.row_values.minCoeff()},
                              {"row_max", surface.row_values.maxCoeff()},
                              {"col_min", surface.col_values.minCoeff()},
                              {"col_max", surface.col_values.maxCoeff()}});
  }
  write_text_file(directory + "/nomogram_index.json", index.dump(2) + "\n");
}

}  // namespace prn
