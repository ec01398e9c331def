#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "condepth/geometry.hpp"

namespace condepth::cli {

struct Marker {
    enum class Shape { Circle, Cross };
    Eigen::Vector2d at;
    Shape shape = Shape::Circle;
    std::string label;
};

struct ScatterPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    Eigen::MatrixXd points;  ///< m x 2
    std::vector<Polyline> contour;
    std::vector<Marker> markers;
};

/// Standalone SVG document; coordinates are printed with 6 significant digits.
std::string render_svg(const ScatterPlot& plot);

}  // namespace condepth::cli
