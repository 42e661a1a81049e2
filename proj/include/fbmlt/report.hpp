#pragma once

#include "fbmlt/experiments.hpp"

#include <string>
#include <vector>

namespace fbmlt {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Minimal static SVG: axes, min/max tick labels, one polyline per series.
std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series);

struct PlotArtifact {
  std::string filename;
  std::string contents;
};

/// Plot-ready CSV tables and SVG charts for an experiment report:
/// clt gives D(n), slope(n) and mean Z(n); derivative gives the error norm on log axes.
std::vector<PlotArtifact> make_plots(const ExperimentReport& report);

}  // namespace fbmlt
