#pragma once

#include <Eigen/Dense>

#include <vector>

namespace condepth {

/// Axis-aligned box; lower and upper have one entry per coordinate.
struct BoundingBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::VectorXd extent() const { return upper - lower; }
};

/// Bounding box of the rows of `points`, each side pushed out by
/// `margin` times the extent along that axis (axes of zero extent use 1).
BoundingBox bounding_box(const Eigen::Ref<const Eigen::MatrixXd>& points, double margin = 0.0);

/// Whether y lies in the closed convex hull of the rows of `vertices`.
///
/// Affinely independent vertex sets are tested with barycentric coordinates
/// (each >= -tol) after checking that y lies on their affine hull. Dependent
/// sets fall back to the affinely independent subsets spanning the same hull.
bool point_in_closed_hull(const Eigen::Ref<const Eigen::MatrixXd>& vertices,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double tol);

/// Indices of the 2-D convex hull vertices in counter-clockwise order.
/// Collinear boundary points are dropped.
std::vector<Eigen::Index> convex_hull_2d(const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Absolute shoelace area of a polygon given by its vertex rows.
double polygon_area(const Eigen::Ref<const Eigen::MatrixXd>& polygon);

struct HullVolume {
    double volume = 0.0;
    Eigen::Index vertex_count = 0;
    bool degenerate = false;  ///< fewer than p + 1 affinely independent points
};

/// Lebesgue measure of the convex hull of the rows (p = 2 area, p = 3 volume).
HullVolume convex_hull_volume(const Eigen::Ref<const Eigen::MatrixXd>& points);

struct Polyline {
    Eigen::MatrixXd vertices;  ///< one (x, y) vertex per row
    bool closed = false;       ///< first vertex connects back to the last
};

/// Isolines at `level` of a scalar field sampled on a regular grid.
///
/// field(i, j) is the value at node (lower.x + i * dx, lower.y + j * dy).
/// Nodes with value >= level are inside. Saddle cells are resolved with the
/// mean of the four corners. Crossings are placed by linear interpolation.
std::vector<Polyline> marching_squares(const Eigen::Ref<const Eigen::MatrixXd>& field,
                                       const BoundingBox& box, double level);

}  // namespace condepth
