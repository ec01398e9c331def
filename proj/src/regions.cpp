#include "condepth/regions.hpp"

#include <array>
#include <numeric>

namespace condepth {

double depth_level_for_mass(const Eigen::Ref<const Eigen::VectorXd>& depths,
                            const Eigen::Ref<const Eigen::VectorXd>& weights, double target) {
    if (depths.size() == 0 || depths.size() != weights.size()) {
        throw DimensionError("depths and weights must be non-empty and aligned");
    }
    if (!(target > 0.0 && target <= 1.0)) throw InputError("mass target must lie in (0, 1]");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(depths.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return depths(a) > depths(b); });

    double mass = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double top = depths(order[i]);
        std::size_t j = i;
        while (j < order.size() && depths(order[j]) >= top - kDepthTieTolerance) {
            mass += weights(order[j]);
            ++j;
        }
        if (mass >= target - 1e-12) return depths(order[j - 1]);
        i = j;
    }
    // Rounding in the weights can leave the total a hair below target.
    return depths(order.back());
}

double alpha_r(const Eigen::Ref<const Eigen::VectorXd>& depths, const Eigen::Ref<const Eigen::VectorXd>& weights,
               double r) {
    if (!(r > 0.0 && r < 1.0)) throw InputError("r must lie in (0, 1)");
    return depth_level_for_mass(depths, weights, r);
}

CentralRegion central_region(const Eigen::Ref<const Eigen::VectorXd>& depths,
                             const Eigen::Ref<const Eigen::VectorXd>& weights, double r, DepthKind kind) {
    CentralRegion region;
    region.r = r;
    region.kind = kind;
    region.alpha = alpha_r(depths, weights, r);
    region.depths = depths;
    for (Eigen::Index i = 0; i < depths.size(); ++i) {
        if (depths(i) >= region.alpha) {
            region.members.push_back(i);
            region.member_mass += weights(i);
        }
    }
    return region;
}

CentralRegion central_region(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                             double r) {
    if (!(r > 0.0 && r < 1.0)) throw InputError("r must lie in (0, 1)");
    return central_region(depth_at_points(sample, kind, cfg), sample.weights, r, kind);
}

bool region_membership(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                       DepthKind kind, const DepthConfig& cfg, double alpha) {
    return evaluate_depth(kind, y, sample, cfg).value >= alpha - kDepthTieTolerance;
}

BoundingBox region_box(const WeightedLocalSample& sample) { return bounding_box(sample.points, 0.1); }

Eigen::MatrixXd depth_field(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                            const BoundingBox& box, Eigen::Index resolution) {
    if (sample.dimension() != 2) throw UnsupportedDimensionError("depth fields are drawn for p = 2 only");
    if (resolution < 1) throw InputError("resolution must be positive");
    const Eigen::Index nodes = resolution + 1;
    const Eigen::Vector2d step = (box.upper - box.lower) / static_cast<double>(resolution);
    Eigen::MatrixXd queries(nodes * nodes, 2);
    for (Eigen::Index i = 0; i < nodes; ++i) {
        for (Eigen::Index j = 0; j < nodes; ++j) {
            queries(i * nodes + j, 0) = box.lower(0) + static_cast<double>(i) * step(0);
            queries(i * nodes + j, 1) = box.lower(1) + static_cast<double>(j) * step(1);
        }
    }
    const Eigen::VectorXd values = depth_at(sample, queries, kind, cfg);
    Eigen::MatrixXd field(nodes, nodes);
    for (Eigen::Index i = 0; i < nodes; ++i) {
        for (Eigen::Index j = 0; j < nodes; ++j) field(i, j) = values(i * nodes + j);
    }
    return field;
}

std::vector<Polyline> contour_2d(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                                 double alpha, const BoundingBox& box, Eigen::Index resolution) {
    if (sample.dimension() != 2) throw UnsupportedDimensionError("contours are available for p = 2 only");
    if (resolution < 8) throw InputError("contour resolution must be at least 8");
    return marching_squares(depth_field(sample, kind, cfg, box, resolution), box, alpha - kDepthTieTolerance);
}

namespace {

struct Candidate {
    Eigen::VectorXd point;
    double depth;
};

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

const Candidate& best_of(const std::vector<Candidate>& candidates) {
    double top = -1.0;
    for (const auto& c : candidates) top = std::max(top, c.depth);
    const Candidate* pick = nullptr;
    for (const auto& c : candidates) {
        if (c.depth < top - kDepthTieTolerance) continue;
        if (!pick || lexicographically_less(c.point, pick->point)) pick = &c;
    }
    return *pick;
}

}  // namespace

MedianResult conditional_median(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg) {
    if (sample.size() == 0) throw InputError("median of an empty sample");
    const Eigen::VectorXd depths = depth_at_points(sample, kind, cfg);
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(sample.size()) + 16);
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        candidates.push_back({sample.points.row(i).transpose(), depths(i)});
    }

    MedianResult out;
    out.policy = MedianSearch::Atoms;
    if (sample.dimension() == 2) {
        out.policy = MedianSearch::AtomsWithGridRefinement;
        const double extent = (sample.points.colwise().maxCoeff() - sample.points.colwise().minCoeff()).maxCoeff();
        if (extent > 0) {
            double step = 0.5 * extent;
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd centre = best_of(candidates).point;
                Eigen::MatrixXd ring(8, 2);
                Eigen::Index r = 0;
                for (int dx = -1; dx <= 1; ++dx) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        if (dx == 0 && dy == 0) continue;
                        ring(r, 0) = centre(0) + step * dx;
                        ring(r, 1) = centre(1) + step * dy;
                        ++r;
                    }
                }
                const Eigen::VectorXd ring_depth = depth_at(sample, ring, kind, cfg);
                for (Eigen::Index q = 0; q < ring.rows(); ++q) {
                    candidates.push_back({ring.row(q).transpose(), ring_depth(q)});
                }
                step *= 0.25;
            }
        }
    }
    const Candidate& best = best_of(candidates);
    out.point = best.point;
    out.depth = best.depth;
    out.candidates = candidates.size();
    return out;
}

Eigen::VectorXd trimmed_mean(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                             double r) {
    if (!(r >= 0.0 && r < 1.0)) throw InputError("trimming fraction must lie in [0, 1)");
    const Eigen::VectorXd depths = depth_at_points(sample, kind, cfg);
    const double alpha = depth_level_for_mass(depths, sample.weights, 1.0 - r);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(sample.dimension());
    double mass = 0.0;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        if (depths(i) >= alpha) {
            sum += sample.weights(i) * sample.points.row(i).transpose();
            mass += sample.weights(i);
        }
    }
    return sum / mass;
}

}  // namespace condepth
