#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "condepth/depth.hpp"
#include "condepth/geometry.hpp"

namespace condepth {

/// Depth values closer than this are one tie class when thresholding.
inline constexpr double kDepthTieTolerance = 1e-12;

/// Largest achieved depth whose upper level set carries weighted mass >= target.
///
/// target must lie in (0, 1]. Depths within kDepthTieTolerance of a class's
/// largest value form one tie class; the returned level is the smallest depth
/// of the selected class, so every member satisfies depth >= alpha and every
/// non-member falls strictly below it.
double depth_level_for_mass(const Eigen::Ref<const Eigen::VectorXd>& depths,
                            const Eigen::Ref<const Eigen::VectorXd>& weights, double target);

/// Sample threshold alpha_n(r) of the 100r% central region, r in (0, 1).
double alpha_r(const Eigen::Ref<const Eigen::VectorXd>& depths,
               const Eigen::Ref<const Eigen::VectorXd>& weights, double r);

struct CentralRegion {
    double r = 0.0;
    double alpha = 0.0;
    std::vector<Eigen::Index> members;  ///< rows of the local sample with depth >= alpha
    double member_mass = 0.0;
    DepthKind kind = DepthKind::Halfspace;
    Eigen::VectorXd depths;             ///< depth of every atom of the local sample
    std::vector<Polyline> contour;      ///< filled on request, p = 2 only
};

/// Central region from precomputed atom depths.
CentralRegion central_region(const Eigen::Ref<const Eigen::VectorXd>& depths,
                             const Eigen::Ref<const Eigen::VectorXd>& weights, double r,
                             DepthKind kind = DepthKind::Halfspace);

/// Central region D_n(alpha_n(r) | x) of a local sample.
CentralRegion central_region(const WeightedLocalSample& sample, DepthKind kind,
                             const DepthConfig& cfg, double r);

/// Whether rho_n(y | x) >= alpha, up to kDepthTieTolerance.
bool region_membership(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                       DepthKind kind, const DepthConfig& cfg, double alpha);

/// Support box pushed out by 10% of its extent on every side.
BoundingBox region_box(const WeightedLocalSample& sample);

/// Depth at the (resolution + 1)^2 nodes of a regular grid over box (p = 2).
Eigen::MatrixXd depth_field(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                            const BoundingBox& box, Eigen::Index resolution);

/// Marching-squares isolines of the depth field at level alpha (p = 2, resolution >= 8).
std::vector<Polyline> contour_2d(const WeightedLocalSample& sample, DepthKind kind,
                                 const DepthConfig& cfg, double alpha, const BoundingBox& box,
                                 Eigen::Index resolution);

enum class MedianSearch { Atoms, AtomsWithGridRefinement };

struct MedianResult {
    Eigen::VectorXd point;
    double depth = 0.0;
    MedianSearch policy = MedianSearch::Atoms;
    std::size_t candidates = 0;
};

/// Deepest point among the atoms, refined on a local grid when p = 2.
///
/// The planar refinement runs two passes of a 9-point neighbourhood search
/// around the incumbent, with steps of 1/2 and then 1/8 of the support's
/// largest extent. Ties (within kDepthTieTolerance) go to the
/// lexicographically smallest candidate.
MedianResult conditional_median(const WeightedLocalSample& sample, DepthKind kind,
                                const DepthConfig& cfg);

/// Weighted mean of the atoms in D_n(alpha_n(1 - r) | x), r in [0, 1).
Eigen::VectorXd trimmed_mean(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                             double r);

/// Hausdorff distance between two finite point sets (one point per row).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hausdorff_distance(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() == 0 || b.rows() == 0) throw InputError("hausdorff_distance: empty point set");
    if (a.cols() != b.cols()) throw DimensionError("hausdorff_distance: dimension mismatch");
    auto directed = [](const auto& from, const auto& to) {
        Scalar worst(0);
        for (Eigen::Index i = 0; i < from.rows(); ++i) {
            Scalar nearest = std::numeric_limits<Scalar>::infinity();
            for (Eigen::Index j = 0; j < to.rows(); ++j) {
                nearest = std::min<Scalar>(nearest, (from.row(i) - to.row(j)).norm());
            }
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace condepth
