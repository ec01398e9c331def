#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "condepth/weights.hpp"

namespace condepth {

enum class DepthKind { Halfspace, Spatial, Projection, Simplicial };

std::string to_string(DepthKind kind);
DepthKind parse_depth_kind(const std::string& name);

/// Approximation and tolerance settings shared by the depth kernels.
struct DepthConfig {
    /// Random directions scanned for halfspace (p >= 3) and projection (p >= 2) depth.
    std::size_t direction_count = 512;
    std::uint64_t seed = 20240101;
    /// Absolute tolerance for point coincidence and simplex membership.
    double tolerance = 1e-12;

    void validate() const;
};

struct DepthResult {
    double value = 0.0;
    /// True when the value comes from a finite direction scan rather than an exact algorithm.
    bool approximate = false;
    /// Extremal scanned direction (diagnostic); empty for exact algorithms.
    Eigen::VectorXd direction;
};

/// Whether the chosen depth is computed exactly in dimension p.
bool depth_is_exact(DepthKind kind, Eigen::Index p);

/// Seeded random unit directions (p x count), generated once per key and shared.
std::shared_ptr<const Eigen::MatrixXd> random_directions(Eigen::Index p, std::size_t count,
                                                         std::uint64_t seed);

/// Smallest value whose cumulative weight reaches half the total weight.
double weighted_lower_median(const Eigen::Ref<const Eigen::VectorXd>& values,
                             const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Weighted Tukey depth: least weighted mass of a closed halfspace containing y.
///
/// p = 1 and p = 2 are exact (the planar case is an angular sweep around y).
/// For p >= 3 the infimum is taken over random directions, the coordinate
/// axes and all normalised pairwise differences, which over-estimates the
/// exact value; the result is then flagged approximate.
DepthResult halfspace_depth(const Eigen::Ref<const Eigen::VectorXd>& y,
                            const WeightedLocalSample& sample, const DepthConfig& cfg = {});

/// 1 - || sum_i w_i (y - Y_i) / ||y - Y_i|| ||, with atoms at y contributing zero.
DepthResult spatial_depth(const Eigen::Ref<const Eigen::VectorXd>& y,
                          const WeightedLocalSample& sample, const DepthConfig& cfg = {});

/// Projection depth with weighted lower medians for location and MAD scale.
///
/// Throws DegenerateScaleError when the weighted MAD vanishes along a scanned direction.
DepthResult projection_depth(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const WeightedLocalSample& sample, const DepthConfig& cfg = {});

/// Weighted simplicial depth over all (p+1)-subsets of the sample, closed simplices.
DepthResult simplicial_depth(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const WeightedLocalSample& sample, const DepthConfig& cfg = {});

DepthResult evaluate_depth(DepthKind kind, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const WeightedLocalSample& sample, const DepthConfig& cfg = {});

/// Depth of every query row with respect to the sample.
Eigen::VectorXd depth_at(const WeightedLocalSample& sample,
                         const Eigen::Ref<const Eigen::MatrixXd>& queries, DepthKind kind,
                         const DepthConfig& cfg = {});

/// Depth of every sample atom.
Eigen::VectorXd depth_at_points(const WeightedLocalSample& sample, DepthKind kind,
                                const DepthConfig& cfg = {});

}  // namespace condepth
