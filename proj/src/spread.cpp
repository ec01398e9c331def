#include "condepth/spread.hpp"

namespace condepth {

std::string to_string(SpreadKind kind) {
    switch (kind) {
        case SpreadKind::Diameter: return "diameter";
        case SpreadKind::GridVolume: return "grid-volume";
        case SpreadKind::HullVolume: return "hull-volume";
    }
    return "unknown";
}

double set_diameter(const Eigen::Ref<const Eigen::MatrixXd>& points, std::array<Eigen::Index, 2>* pair) {
    double best = 0.0;
    std::array<Eigen::Index, 2> where{0, 0};
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
            const double d = (points.row(i) - points.row(j)).norm();
            if (d > best) {
                best = d;
                where = {i, j};
            }
        }
    }
    if (pair) *pair = where;
    return best;
}

namespace {

Eigen::MatrixXd member_points(const WeightedLocalSample& sample, const CentralRegion& region) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(region.members.size()), sample.dimension());
    for (std::size_t i = 0; i < region.members.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = sample.points.row(region.members[i]);
    }
    return pts;
}

void require_volume_dimension(const WeightedLocalSample& sample) {
    const Eigen::Index p = sample.dimension();
    if (p != 2 && p != 3) {
        throw UnsupportedDimensionError("volume spread needs p = 2 or 3 (got p = " + std::to_string(p) +
                                        "); grid cost grows as resolution^p, use the diameter instead");
    }
}

}  // namespace

SpreadEstimate spread_diameter(const WeightedLocalSample& sample, const CentralRegion& region) {
    SpreadEstimate out;
    out.r = region.r;
    out.kind = SpreadKind::Diameter;
    out.alpha = region.alpha;
    std::array<Eigen::Index, 2> local{0, 0};
    out.value = set_diameter(member_points(sample, region), &local);
    if (!region.members.empty()) {
        out.pair = {region.members[static_cast<std::size_t>(local[0])],
                    region.members[static_cast<std::size_t>(local[1])]};
    }
    return out;
}

SpreadEstimate spread_diameter(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                               double r) {
    if (sample.size() == 0) throw InputError("spread of an empty sample");
    return spread_diameter(sample, central_region(sample, kind, cfg, r));
}

SpreadEstimate spread_volume_grid(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                                  double r, Eigen::Index resolution) {
    require_volume_dimension(sample);
    if (resolution < 16) throw InputError("grid volume resolution must be at least 16");
    const CentralRegion region = central_region(sample, kind, cfg, r);
    const Eigen::Index p = sample.dimension();
    const BoundingBox box = region_box(sample);
    const Eigen::VectorXd step = box.extent() / static_cast<double>(resolution);

    Eigen::Index cells = 1;
    for (Eigen::Index d = 0; d < p; ++d) cells *= resolution;
    Eigen::MatrixXd centres(cells, p);
    for (Eigen::Index c = 0; c < cells; ++c) {
        Eigen::Index rest = c;
        for (Eigen::Index d = 0; d < p; ++d) {
            const Eigen::Index idx = rest % resolution;
            rest /= resolution;
            centres(c, d) = box.lower(d) + (static_cast<double>(idx) + 0.5) * step(d);
        }
    }
    const Eigen::VectorXd depth = depth_at(sample, centres, kind, cfg);
    const auto inside = static_cast<double>((depth.array() >= region.alpha - kDepthTieTolerance).count());

    SpreadEstimate out;
    out.r = r;
    out.kind = SpreadKind::GridVolume;
    out.alpha = region.alpha;
    out.resolution = resolution;
    out.value = inside * step.prod();
    return out;
}

SpreadEstimate spread_volume_hull(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg,
                                  double r) {
    require_volume_dimension(sample);
    const CentralRegion region = central_region(sample, kind, cfg, r);
    const HullVolume hull = convex_hull_volume(member_points(sample, region));
    SpreadEstimate out;
    out.r = r;
    out.kind = SpreadKind::HullVolume;
    out.alpha = region.alpha;
    out.value = hull.volume;
    out.hull_vertices = hull.vertex_count;
    out.degenerate = hull.degenerate;
    return out;
}

}  // namespace condepth
