#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

#include "condepth/regions.hpp"

namespace condepth {

enum class SpreadKind { Diameter, GridVolume, HullVolume };

std::string to_string(SpreadKind kind);

struct SpreadEstimate {
    double r = 0.0;
    SpreadKind kind = SpreadKind::Diameter;
    double value = 0.0;
    double alpha = 0.0;
    /// Diameter: local-sample rows of the farthest pair (equal when value is 0).
    std::array<Eigen::Index, 2> pair{0, 0};
    /// GridVolume: cells per axis.
    Eigen::Index resolution = 0;
    /// HullVolume: number of hull vertices.
    Eigen::Index hull_vertices = 0;
    /// HullVolume: qualifying atoms span less than p dimensions.
    bool degenerate = false;
};

/// Largest pairwise Euclidean distance among the selected rows.
double set_diameter(const Eigen::Ref<const Eigen::MatrixXd>& points,
                    std::array<Eigen::Index, 2>* pair = nullptr);

/// Delta_n(r | x): diameter of the atoms inside the 100r% central region.
SpreadEstimate spread_diameter(const WeightedLocalSample& sample, const CentralRegion& region);
SpreadEstimate spread_diameter(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                               double r);

/// S_n(r | x): grid estimate of the Lebesgue measure of the central region (p = 2, 3).
///
/// Counts cells of a regular grid over the 10%-expanded support box whose
/// centre has depth >= alpha_n(r); resolution is cells per axis (>= 16).
SpreadEstimate spread_volume_grid(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                                  double r, Eigen::Index resolution);

/// Volume of the convex hull of the atoms inside the central region (p = 2, 3).
SpreadEstimate spread_volume_hull(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                                  double r);

}  // namespace condepth
