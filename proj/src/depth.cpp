#include "condepth/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

#include "condepth/geometry.hpp"

namespace condepth {

std::string to_string(DepthKind kind) {
    switch (kind) {
        case DepthKind::Halfspace: return "halfspace";
        case DepthKind::Spatial: return "spatial";
        case DepthKind::Projection: return "projection";
        case DepthKind::Simplicial: return "simplicial";
    }
    return "unknown";
}

DepthKind parse_depth_kind(const std::string& name) {
    if (name == "halfspace") return DepthKind::Halfspace;
    if (name == "spatial") return DepthKind::Spatial;
    if (name == "projection") return DepthKind::Projection;
    if (name == "simplicial") return DepthKind::Simplicial;
    throw InputError("unknown depth '" + name + "' (expected halfspace, spatial, projection or simplicial)");
}

void DepthConfig::validate() const {
    if (direction_count == 0) throw InputError("direction_count must be at least 1");
    if (!(tolerance >= 0) || !std::isfinite(tolerance)) throw InputError("tolerance must be finite and >= 0");
}

bool depth_is_exact(DepthKind kind, Eigen::Index p) {
    switch (kind) {
        case DepthKind::Halfspace: return p <= 2;
        case DepthKind::Projection: return p == 1;
        case DepthKind::Spatial:
        case DepthKind::Simplicial: return true;
    }
    return false;
}

std::shared_ptr<const Eigen::MatrixXd> random_directions(Eigen::Index p, std::size_t count,
                                                         std::uint64_t seed) {
    using Key = std::tuple<Eigen::Index, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> cache;

    const Key key{p, count, seed};
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(p), 0x6469u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    auto dirs = std::make_shared<Eigen::MatrixXd>(p, static_cast<Eigen::Index>(count));
    for (Eigen::Index c = 0; c < dirs->cols(); ++c) {
        double norm = 0.0;
        while (norm < 1e-12) {
            for (Eigen::Index d = 0; d < p; ++d) (*dirs)(d, c) = normal(rng);
            norm = dirs->col(c).norm();
        }
        dirs->col(c) /= norm;
    }
    cache.emplace(key, dirs);
    return dirs;
}

double weighted_lower_median(const Eigen::Ref<const Eigen::VectorXd>& values,
                             const Eigen::Ref<const Eigen::VectorXd>& weights) {
    if (values.size() == 0 || values.size() != weights.size()) {
        throw DimensionError("weighted_lower_median: empty or mismatched inputs");
    }
    thread_local std::vector<Eigen::Index> order;
    order.resize(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
    const double half = 0.5 * weights.sum() * (1.0 - 1e-12);
    double cumulative = 0.0;
    for (const Eigen::Index i : order) {
        cumulative += weights(i);
        if (cumulative >= half) return values(i);
    }
    return values(order.back());
}

namespace {

void check_query(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample) {
    if (sample.size() == 0) throw InputError("depth of an empty sample");
    if (y.size() != sample.dimension()) {
        throw DimensionError("query has dimension " + std::to_string(y.size()) + ", sample has " +
                             std::to_string(sample.dimension()));
    }
    if (!y.allFinite()) throw InputError("query point is not finite");
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// ---------------------------------------------------------------- halfspace

double halfspace_line(double y, const WeightedLocalSample& s, double tol) {
    double above = 0.0, below = 0.0, on = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double d = s.points(i, 0) - y;
        if (d > tol) above += s.weights(i);
        else if (d < -tol) below += s.weights(i);
        else on += s.weights(i);
    }
    return on + std::min(above, below);
}

struct Ray {
    double angle;
    double dx;
    double dy;
    double mass;
};

// Exact planar Tukey depth by rotating a line about y.
//
// For a generic direction the closed halfplane holds exactly the atoms at y
// plus the rays with angle in an open half-circle. The minimum over generic
// directions is attained just past a critical line, i.e. on (a, a + pi] with
// a the angle of some ray, or on the complementary half-circle.
double halfspace_plane(double qx, double qy, const WeightedLocalSample& s, double tol) {
    thread_local std::vector<Ray> rays;
    thread_local std::vector<double> prefix;
    rays.clear();
    double coincident = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double dx = s.points(i, 0) - qx + 0.0;
        const double dy = s.points(i, 1) - qy + 0.0;
        if (std::hypot(dx, dy) <= tol) {
            coincident += s.weights(i);
        } else {
            rays.push_back({std::atan2(dy, dx), dx, dy, s.weights(i)});
        }
    }
    if (rays.empty()) return coincident;
    std::sort(rays.begin(), rays.end(), [](const Ray& a, const Ray& b) { return a.angle < b.angle; });

    const double rel = std::max(tol, 1e-15);
    auto cross = [](const Ray& a, const Ray& b) { return a.dx * b.dy - a.dy * b.dx; };
    auto dot = [](const Ray& a, const Ray& b) { return a.dx * b.dx + a.dy * b.dy; };
    auto norms = [](const Ray& a, const Ray& b) { return std::hypot(a.dx, a.dy) * std::hypot(b.dx, b.dy); };

    // Merge atoms lying on a common ray from y.
    std::size_t groups = 0;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        if (groups > 0) {
            Ray& last = rays[groups - 1];
            if (std::abs(cross(last, rays[i])) <= rel * norms(last, rays[i]) && dot(last, rays[i]) > 0) {
                last.mass += rays[i].mass;
                continue;
            }
        }
        rays[groups++] = rays[i];
    }
    if (groups > 1) {
        Ray& first = rays.front();
        const Ray& last = rays[groups - 1];
        if (std::abs(cross(first, last)) <= rel * norms(first, last) && dot(first, last) > 0) {
            first.mass += last.mass;
            --groups;
        }
    }
    rays.resize(groups);

    const std::size_t g_count = rays.size();
    prefix.assign(2 * g_count + 1, 0.0);
    for (std::size_t i = 0; i < 2 * g_count; ++i) prefix[i + 1] = prefix[i] + rays[i % g_count].mass;
    const double total = prefix[g_count];

    // upper(g, h): ray h lies in the half-circle (angle_g, angle_g + pi].
    auto upper = [&](const Ray& g, const Ray& h) {
        const double c = cross(g, h);
        const double bound = rel * norms(g, h);
        if (c > bound) return true;
        if (c < -bound) return false;
        return dot(g, h) < 0;
    };

    double best = total;
    std::size_t end = 1;
    for (std::size_t g = 0; g < g_count; ++g) {
        end = std::max(end, g + 1);
        while (end < g + g_count && upper(rays[g], rays[end % g_count])) ++end;
        const double half = prefix[end] - prefix[g + 1];
        best = std::min({best, half, total - half});
    }
    return coincident + std::max(0.0, best);
}

DepthResult halfspace_scan(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& s,
                           const DepthConfig& cfg) {
    const Eigen::Index p = s.dimension();
    const Eigen::Index m = s.size();
    const Eigen::MatrixXd diff = s.points.rowwise() - y.transpose();
    const Eigen::VectorXd lengths = diff.rowwise().norm();
    const Eigen::VectorXd slack = cfg.tolerance * lengths.array().max(1.0).matrix();

    DepthResult out;
    out.value = 1.0;
    out.approximate = true;
    auto consider = [&](const Eigen::Ref<const Eigen::VectorXd>& u) {
        const Eigen::VectorXd proj = diff * u;
        double plus = 0.0, minus = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (proj(i) >= -slack(i)) plus += s.weights(i);
            if (proj(i) <= slack(i)) minus += s.weights(i);
        }
        if (plus < out.value) { out.value = plus; out.direction = u; }
        if (minus < out.value) { out.value = minus; out.direction = -u; }
    };

    const auto dirs = random_directions(p, cfg.direction_count, cfg.seed);
    for (Eigen::Index c = 0; c < dirs->cols(); ++c) consider(dirs->col(c));
    for (Eigen::Index d = 0; d < p; ++d) consider(Eigen::VectorXd::Unit(p, d));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            Eigen::VectorXd u = (s.points.row(j) - s.points.row(i)).transpose();
            const double len = u.norm();
            if (len > cfg.tolerance) consider(u / len);
        }
    }
    out.value = clamp_unit(out.value);
    return out;
}

// ---------------------------------------------------------------- projection

struct Outlyingness {
    double ratio;
    bool degenerate;
};

Outlyingness outlyingness(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& s,
                          const Eigen::Ref<const Eigen::VectorXd>& u, double tol) {
    thread_local Eigen::VectorXd z;
    thread_local Eigen::VectorXd dev;
    z.noalias() = s.points * u;
    const double med = weighted_lower_median(z, s.weights);
    dev = (z.array() - med).abs();
    const double mad = weighted_lower_median(dev, s.weights);
    const double scale = std::max(1.0, dev.maxCoeff());
    if (mad <= tol * scale) return {0.0, true};
    return {std::abs(u.dot(y) - med) / mad, false};
}

[[noreturn]] void throw_degenerate(const Eigen::Ref<const Eigen::VectorXd>& u) {
    std::string dir = "(";
    for (Eigen::Index d = 0; d < u.size(); ++d) {
        if (d) dir += ", ";
        dir += std::to_string(u(d));
    }
    throw DegenerateScaleError("weighted MAD is zero along direction " + dir + ")");
}

// ---------------------------------------------------------------- simplicial

// Row r of `normals` is the inward unit normal of the facet opposite vertex r;
// y is on its inner side when normals.row(r) y >= offsets(r). p = 2 or 3.
void simplex_facets(const Eigen::MatrixXd& vertices, Eigen::MatrixXd& normals, Eigen::VectorXd& offsets) {
    const Eigen::Index k = vertices.rows();
    for (Eigen::Index r = 0; r < k; ++r) {
        Eigen::Index facet[3];
        Eigen::Index f = 0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j != r) facet[f++] = j;
        }
        Eigen::VectorXd n(vertices.cols());
        if (k == 3) {
            const Eigen::Vector2d d = (vertices.row(facet[1]) - vertices.row(facet[0])).transpose();
            n << -d.y(), d.x();
        } else {
            const Eigen::Vector3d a = (vertices.row(facet[1]) - vertices.row(facet[0])).transpose();
            const Eigen::Vector3d b = (vertices.row(facet[2]) - vertices.row(facet[0])).transpose();
            n = a.cross(b);
        }
        n /= n.norm();
        double offset = n.dot(vertices.row(facet[0]).transpose());
        if (n.dot(vertices.row(r).transpose()) < offset) {
            n = -n;
            offset = -offset;
        }
        normals.row(r) = n.transpose();
        offsets(r) = offset;
    }
}

// Numerator and denominator accumulate in lexicographic subset order.
Eigen::VectorXd simplicial_batch(const WeightedLocalSample& s, const Eigen::Ref<const Eigen::MatrixXd>& queries,
                                 double tol) {
    const Eigen::Index p = s.dimension();
    const Eigen::Index m = s.size();
    const Eigen::Index k = p + 1;
    if (m <= p) {
        throw InputError("simplicial depth needs at least " + std::to_string(p + 1) +
                         " support points, got " + std::to_string(m));
    }
    const Eigen::Index nq = queries.rows();
    Eigen::VectorXd numerator = Eigen::VectorXd::Zero(nq);
    double denominator = 0.0;

    std::vector<Eigen::Index> pick(static_cast<std::size_t>(k));
    std::iota(pick.begin(), pick.end(), Eigen::Index{0});
    Eigen::MatrixXd vertices(k, p);
    Eigen::MatrixXd edges(p, p);
    Eigen::MatrixXd normals(k, p);
    Eigen::VectorXd offsets(k);
    for (;;) {
        double product = 1.0;
        for (Eigen::Index r = 0; r < k; ++r) {
            const Eigen::Index idx = pick[static_cast<std::size_t>(r)];
            vertices.row(r) = s.points.row(idx);
            product *= s.weights(idx);
        }
        denominator += product;

        for (Eigen::Index c = 0; c < p; ++c) edges.col(c) = (vertices.row(c + 1) - vertices.row(0)).transpose();
        double norms = 1.0;
        for (Eigen::Index c = 0; c < p; ++c) norms *= edges.col(c).norm();
        const bool facets = p >= 2 && p <= 3 && std::abs(edges.determinant()) > 1e-10 * norms;
        if (facets) simplex_facets(vertices, normals, offsets);
        for (Eigen::Index q = 0; q < nq; ++q) {
            const auto y = queries.row(q);
            bool inside = false;
            for (Eigen::Index r = 0; r < k && !inside; ++r) inside = (vertices.row(r) - y).norm() <= tol;
            if (!inside) {
                inside = facets ? ((normals * y.transpose() - offsets).array() >= -tol).all()
                                : point_in_closed_hull(vertices, y.transpose(), tol);
            }
            if (inside) numerator(q) += product;
        }

        Eigen::Index pos = k - 1;
        while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
        if (pos < 0) break;
        ++pick[static_cast<std::size_t>(pos)];
        for (Eigen::Index r = pos + 1; r < k; ++r) pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
    }
    return (numerator / denominator).unaryExpr([](double v) { return clamp_unit(v); });
}

}  // namespace

DepthResult halfspace_depth(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                            const DepthConfig& cfg) {
    check_query(y, sample);
    cfg.validate();
    const Eigen::Index p = sample.dimension();
    if (p == 1) return {clamp_unit(halfspace_line(y(0), sample, cfg.tolerance)), false, {}};
    if (p == 2) return {clamp_unit(halfspace_plane(y(0), y(1), sample, cfg.tolerance)), false, {}};
    return halfspace_scan(y, sample, cfg);
}

DepthResult spatial_depth(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                          const DepthConfig& cfg) {
    check_query(y, sample);
    cfg.validate();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(y.size());
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const Eigen::VectorXd d = y - sample.points.row(i).transpose();
        const double len = d.norm();
        if (len > cfg.tolerance) sum += sample.weights(i) * d / len;
    }
    return {clamp_unit(1.0 - sum.norm()), false, {}};
}

DepthResult projection_depth(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                             const DepthConfig& cfg) {
    check_query(y, sample);
    cfg.validate();
    const Eigen::Index p = sample.dimension();
    DepthResult out;
    out.approximate = p > 1;
    double sup = -1.0;
    auto scan = [&](const Eigen::Ref<const Eigen::VectorXd>& u) {
        const Outlyingness o = outlyingness(y, sample, u, cfg.tolerance);
        if (o.degenerate) throw_degenerate(u);
        if (o.ratio > sup) {
            sup = o.ratio;
            out.direction = u;
        }
    };

    if (p == 1) {
        scan(Eigen::VectorXd::Ones(1));
    } else if (p == 2) {
        const auto count = static_cast<double>(cfg.direction_count);
        for (std::size_t j = 0; j < cfg.direction_count; ++j) {
            const double theta = std::numbers::pi * static_cast<double>(j) / count;
            scan(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
        }
    } else {
        const auto dirs = random_directions(p, cfg.direction_count, cfg.seed);
        for (Eigen::Index c = 0; c < dirs->cols(); ++c) scan(dirs->col(c));
        for (Eigen::Index d = 0; d < p; ++d) scan(Eigen::VectorXd::Unit(p, d));
        for (Eigen::Index i = 0; i < sample.size(); ++i) {
            for (Eigen::Index j = i + 1; j < sample.size(); ++j) {
                const Eigen::VectorXd u = (sample.points.row(j) - sample.points.row(i)).transpose();
                const double len = u.norm();
                if (len > cfg.tolerance) scan(u / len);
            }
        }
    }
    out.value = 1.0 / (1.0 + sup);
    return out;
}

DepthResult simplicial_depth(const Eigen::Ref<const Eigen::VectorXd>& y, const WeightedLocalSample& sample,
                             const DepthConfig& cfg) {
    check_query(y, sample);
    cfg.validate();
    return {simplicial_batch(sample, y.transpose(), cfg.tolerance)(0), false, {}};
}

DepthResult evaluate_depth(DepthKind kind, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const WeightedLocalSample& sample, const DepthConfig& cfg) {
    switch (kind) {
        case DepthKind::Halfspace: return halfspace_depth(y, sample, cfg);
        case DepthKind::Spatial: return spatial_depth(y, sample, cfg);
        case DepthKind::Projection: return projection_depth(y, sample, cfg);
        case DepthKind::Simplicial: return simplicial_depth(y, sample, cfg);
    }
    throw InputError("unknown depth kind");
}

Eigen::VectorXd depth_at(const WeightedLocalSample& sample, const Eigen::Ref<const Eigen::MatrixXd>& queries,
                         DepthKind kind, const DepthConfig& cfg) {
    if (queries.rows() > 0 && queries.cols() != sample.dimension()) {
        throw DimensionError("queries have dimension " + std::to_string(queries.cols()) + ", sample has " +
                             std::to_string(sample.dimension()));
    }
    cfg.validate();
    if (kind == DepthKind::Simplicial) {
        if (sample.size() == 0) throw InputError("depth of an empty sample");
        if (!queries.allFinite()) throw InputError("query point is not finite");
        return simplicial_batch(sample, queries, cfg.tolerance);
    }
    Eigen::VectorXd out(queries.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        out(q) = evaluate_depth(kind, queries.row(q).transpose(), sample, cfg).value;
    }
    return out;
}

Eigen::VectorXd depth_at_points(const WeightedLocalSample& sample, DepthKind kind, const DepthConfig& cfg) {
    return depth_at(sample, sample.points, kind, cfg);
}

}  // namespace condepth
