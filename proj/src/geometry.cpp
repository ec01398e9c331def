#include "condepth/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "condepth/error.hpp"

namespace condepth {

BoundingBox bounding_box(const Eigen::Ref<const Eigen::MatrixXd>& points, double margin) {
    if (points.rows() == 0) throw InputError("bounding_box: no points");
    BoundingBox box;
    box.lower = points.colwise().minCoeff().transpose();
    box.upper = points.colwise().maxCoeff().transpose();
    for (Eigen::Index d = 0; d < box.lower.size(); ++d) {
        double extent = box.upper(d) - box.lower(d);
        if (extent <= 0) extent = 1.0;
        box.lower(d) -= margin * extent;
        box.upper(d) += margin * extent;
    }
    return box;
}

namespace {

double coordinate_scale(const Eigen::Ref<const Eigen::MatrixXd>& v,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
    return std::max({1.0, v.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
}

bool barycentric_inside(const Eigen::Ref<const Eigen::VectorXd>& lambda, double tol) {
    return (lambda.array() >= -tol).all() && 1.0 - lambda.sum() >= -tol;
}

template <int P>
int fixed_simplex_test(const Eigen::Ref<const Eigen::MatrixXd>& v,
                       const Eigen::Ref<const Eigen::VectorXd>& y, double tol) {
    using Mat = Eigen::Matrix<double, P, P>;
    using Vec = Eigen::Matrix<double, P, 1>;
    Mat e;
    for (int c = 0; c < P; ++c) e.col(c) = (v.row(c + 1) - v.row(0)).transpose();
    const double det = e.determinant();
    double norms = 1.0;
    for (int c = 0; c < P; ++c) norms *= e.col(c).norm();
    if (!(std::abs(det) > 1e-10 * norms)) return -1;  // let the general path decide
    const Vec lambda = e.inverse() * (y - v.row(0).transpose());
    return barycentric_inside(lambda, tol) ? 1 : 0;
}

}  // namespace

bool point_in_closed_hull(const Eigen::Ref<const Eigen::MatrixXd>& vertices,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double tol) {
    const Eigen::Index k = vertices.rows();
    const Eigen::Index p = vertices.cols();
    if (k == 0) return false;
    if (y.size() != p) throw DimensionError("point_in_closed_hull: dimension mismatch");

    if (k == p + 1 && p == 2) {
        const int r = fixed_simplex_test<2>(vertices, y, tol);
        if (r >= 0) return r == 1;
    } else if (k == p + 1 && p == 3) {
        const int r = fixed_simplex_test<3>(vertices, y, tol);
        if (r >= 0) return r == 1;
    }

    const double scale = coordinate_scale(vertices, y);
    const Eigen::VectorXd base = vertices.row(0).transpose();
    if (k == 1) return (y - base).norm() <= tol * scale;

    const Eigen::MatrixXd edges = (vertices.bottomRows(k - 1).rowwise() - vertices.row(0)).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(edges);
    qr.setThreshold(std::max(tol, 1e-14));
    const Eigen::Index rank = qr.rank();

    if (rank == k - 1) {
        const Eigen::VectorXd rhs = y - base;
        const Eigen::VectorXd lambda = qr.solve(rhs);
        if ((edges * lambda - rhs).norm() > std::max(tol, 1e-12) * scale) return false;
        return barycentric_inside(lambda, tol);
    }

    // Rank-deficient: the hull is the union of hulls of rank + 1 vertices.
    const Eigen::Index choose = rank + 1;
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(choose));
    std::iota(pick.begin(), pick.end(), Eigen::Index{0});
    Eigen::MatrixXd subset(choose, p);
    for (;;) {
        for (Eigen::Index r = 0; r < choose; ++r) subset.row(r) = vertices.row(pick[static_cast<std::size_t>(r)]);
        if (point_in_closed_hull(subset, y, tol)) return true;
        Eigen::Index pos = choose - 1;
        while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == k - choose + pos) --pos;
        if (pos < 0) break;
        ++pick[static_cast<std::size_t>(pos)];
        for (Eigen::Index q = pos + 1; q < choose; ++q) {
            pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
        }
    }
    return false;
}

std::vector<Eigen::Index> convex_hull_2d(const Eigen::Ref<const Eigen::MatrixXd>& points) {
    if (points.cols() != 2) throw DimensionError("convex_hull_2d needs 2-D points");
    const Eigen::Index n = points.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (points(a, 0) != points(b, 0)) return points(a, 0) < points(b, 0);
        return points(a, 1) < points(b, 1);
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](Eigen::Index a, Eigen::Index b) {
                                return points(a, 0) == points(b, 0) && points(a, 1) == points(b, 1);
                            }),
                order.end());
    if (order.size() < 3) return order;

    auto cross = [&](Eigen::Index o, Eigen::Index a, Eigen::Index b) {
        return (points(a, 0) - points(o, 0)) * (points(b, 1) - points(o, 1)) -
               (points(a, 1) - points(o, 1)) * (points(b, 0) - points(o, 0));
    };
    std::vector<Eigen::Index> hull(2 * order.size());
    std::size_t h = 0;
    for (const Eigen::Index idx : order) {
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], idx) <= 0) --h;
        hull[h++] = idx;
    }
    const std::size_t lower_size = h + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
        while (h >= lower_size && cross(hull[h - 2], hull[h - 1], *it) <= 0) --h;
        hull[h++] = *it;
    }
    hull.resize(h - 1);
    return hull;
}

double polygon_area(const Eigen::Ref<const Eigen::MatrixXd>& polygon) {
    const Eigen::Index n = polygon.rows();
    double twice = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = (i + 1) % n;
        twice += polygon(i, 0) * polygon(j, 1) - polygon(j, 0) * polygon(i, 1);
    }
    return 0.5 * std::abs(twice);
}

namespace {

HullVolume hull_area(const Eigen::Ref<const Eigen::MatrixXd>& points) {
    HullVolume out;
    const auto hull = convex_hull_2d(points);
    if (hull.size() < 3) {
        out.degenerate = true;
        out.vertex_count = static_cast<Eigen::Index>(hull.size());
        return out;
    }
    Eigen::MatrixXd polygon(static_cast<Eigen::Index>(hull.size()), 2);
    for (std::size_t i = 0; i < hull.size(); ++i) polygon.row(static_cast<Eigen::Index>(i)) = points.row(hull[i]);
    out.volume = polygon_area(polygon);
    out.vertex_count = polygon.rows();
    const double scale = (points.colwise().maxCoeff() - points.colwise().minCoeff()).maxCoeff();
    if (out.volume <= 1e-12 * scale * scale) {
        out.volume = 0.0;
        out.degenerate = true;
    }
    return out;
}

struct Face {
    std::array<Eigen::Index, 3> v;
    Eigen::Vector3d normal;
    double offset;
    bool alive = true;
};

Face make_face(const std::vector<Eigen::Vector3d>& pts, Eigen::Index a, Eigen::Index b, Eigen::Index c,
               const Eigen::Vector3d& interior) {
    Face f{{a, b, c}, Eigen::Vector3d::Zero(), 0.0, true};
    f.normal = (pts[static_cast<std::size_t>(b)] - pts[static_cast<std::size_t>(a)])
                   .cross(pts[static_cast<std::size_t>(c)] - pts[static_cast<std::size_t>(a)]);
    f.offset = f.normal.dot(pts[static_cast<std::size_t>(a)]);
    if (f.normal.dot(interior) - f.offset > 0) {
        std::swap(f.v[1], f.v[2]);
        f.normal = -f.normal;
        f.offset = -f.offset;
    }
    return f;
}

HullVolume hull_volume_3d(const Eigen::Ref<const Eigen::MatrixXd>& points) {
    HullVolume out;
    const Eigen::Index n = points.rows();
    std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = points.row(i).transpose();
    auto at = [&](Eigen::Index i) -> const Eigen::Vector3d& { return pts[static_cast<std::size_t>(i)]; };

    const double scale = std::max(1e-300, (points.colwise().maxCoeff() - points.colwise().minCoeff()).maxCoeff());
    const double eps = 1e-12 * scale;
    out.degenerate = true;
    if (n < 4) return out;

    Eigen::Index i0 = 0;
    for (Eigen::Index i = 1; i < n; ++i) if (at(i).x() < at(i0).x()) i0 = i;
    Eigen::Index i1 = i0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (at(i) - at(i0)).norm();
        if (d > best) { best = d; i1 = i; }
    }
    if (best <= eps) return out;
    const Eigen::Vector3d axis = (at(i1) - at(i0)).normalized();
    Eigen::Index i2 = i0;
    best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (at(i) - at(i0)).cross(axis).norm();
        if (d > best) { best = d; i2 = i; }
    }
    if (best <= eps) return out;
    const Eigen::Vector3d plane = (at(i1) - at(i0)).cross(at(i2) - at(i0)).normalized();
    Eigen::Index i3 = i0;
    best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = std::abs((at(i) - at(i0)).dot(plane));
        if (d > best) { best = d; i3 = i; }
    }
    if (best <= eps) return out;
    out.degenerate = false;

    const Eigen::Vector3d interior = (at(i0) + at(i1) + at(i2) + at(i3)) / 4.0;
    std::vector<Face> faces{make_face(pts, i0, i1, i2, interior), make_face(pts, i0, i1, i3, interior),
                            make_face(pts, i0, i2, i3, interior), make_face(pts, i1, i2, i3, interior)};

    for (Eigen::Index p = 0; p < n; ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        std::set<std::pair<Eigen::Index, Eigen::Index>> edges;
        bool any = false;
        for (auto& f : faces) {
            if (!f.alive) continue;
            const double norm = f.normal.norm();
            if (f.normal.dot(at(p)) - f.offset > eps * norm) {
                f.alive = false;
                any = true;
                for (int e = 0; e < 3; ++e) edges.emplace(f.v[static_cast<std::size_t>(e)], f.v[static_cast<std::size_t>((e + 1) % 3)]);
            }
        }
        if (!any) continue;
        for (const auto& [a, b] : edges) {
            if (edges.count({b, a}) == 0) faces.push_back(make_face(pts, a, b, p, interior));
        }
    }

    std::set<Eigen::Index> used;
    double volume = 0.0;
    for (const auto& f : faces) {
        if (!f.alive) continue;
        const Eigen::Vector3d a = at(f.v[0]) - interior;
        const Eigen::Vector3d b = at(f.v[1]) - interior;
        const Eigen::Vector3d c = at(f.v[2]) - interior;
        volume += a.dot(b.cross(c)) / 6.0;
        used.insert(f.v.begin(), f.v.end());
    }
    out.volume = std::abs(volume);
    out.vertex_count = static_cast<Eigen::Index>(used.size());
    return out;
}

}  // namespace

HullVolume convex_hull_volume(const Eigen::Ref<const Eigen::MatrixXd>& points) {
    if (points.cols() == 2) return hull_area(points);
    if (points.cols() == 3) return hull_volume_3d(points);
    throw UnsupportedDimensionError("convex hull volume is available for p = 2 and p = 3 only");
}

std::vector<Polyline> marching_squares(const Eigen::Ref<const Eigen::MatrixXd>& field,
                                       const BoundingBox& box, double level) {
    const Eigen::Index nx = field.rows() - 1;
    const Eigen::Index ny = field.cols() - 1;
    if (nx < 1 || ny < 1) throw InputError("marching_squares needs at least one cell");
    if (box.lower.size() != 2) throw DimensionError("marching_squares needs a 2-D box");
    const double dx = (box.upper(0) - box.lower(0)) / static_cast<double>(nx);
    const double dy = (box.upper(1) - box.lower(1)) / static_cast<double>(ny);

    // Horizontal edge (i,j)-(i+1,j) gets id 2*(i*(ny+1)+j), vertical (i,j)-(i,j+1) the odd id.
    auto h_edge = [&](Eigen::Index i, Eigen::Index j) { return 2 * (i * (ny + 1) + j); };
    auto v_edge = [&](Eigen::Index i, Eigen::Index j) { return 2 * (i * (ny + 1) + j) + 1; };
    auto inside = [&](Eigen::Index i, Eigen::Index j) { return field(i, j) >= level; };

    std::map<Eigen::Index, Eigen::Vector2d> crossing;
    auto crossing_point = [&](Eigen::Index id) -> Eigen::Vector2d {
        auto it = crossing.find(id);
        if (it != crossing.end()) return it->second;
        const Eigen::Index base = id / 2;
        const Eigen::Index i = base / (ny + 1);
        const Eigen::Index j = base % (ny + 1);
        const bool vertical = id % 2 == 1;
        const double a = field(i, j);
        const double b = vertical ? field(i, j + 1) : field(i + 1, j);
        double t = (b == a) ? 0.5 : (level - a) / (b - a);
        t = std::clamp(t, 0.0, 1.0);
        Eigen::Vector2d pt(box.lower(0) + static_cast<double>(i) * dx, box.lower(1) + static_cast<double>(j) * dy);
        if (vertical) pt.y() += t * dy; else pt.x() += t * dx;
        crossing.emplace(id, pt);
        return pt;
    };

    std::vector<std::pair<Eigen::Index, Eigen::Index>> segments;
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < ny; ++j) {
            // corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edges: 0 bottom 1 right 2 top 3 left
            const std::array<bool, 4> in{inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)};
            const std::array<Eigen::Index, 4> edge{h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
            std::array<bool, 4> cut{in[0] != in[1], in[1] != in[2], in[3] != in[2], in[0] != in[3]};
            const int cuts = cut[0] + cut[1] + cut[2] + cut[3];
            if (cuts == 2) {
                std::array<Eigen::Index, 2> ends{};
                int k = 0;
                for (int e = 0; e < 4; ++e) if (cut[static_cast<std::size_t>(e)]) ends[static_cast<std::size_t>(k++)] = edge[static_cast<std::size_t>(e)];
                segments.emplace_back(ends[0], ends[1]);
            } else if (cuts == 4) {
                const double centre = 0.25 * (field(i, j) + field(i + 1, j) + field(i + 1, j + 1) + field(i, j + 1));
                const bool centre_in = centre >= level;
                // Separate each corner whose state differs from the centre; corner c sits between edges c-1 and c.
                for (int c = 0; c < 4; ++c) {
                    if (in[static_cast<std::size_t>(c)] != centre_in) {
                        segments.emplace_back(edge[static_cast<std::size_t>((c + 3) % 4)], edge[static_cast<std::size_t>(c)]);
                    }
                }
            }
        }
    }

    std::map<Eigen::Index, std::vector<std::size_t>> touching;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        touching[segments[s].first].push_back(s);
        touching[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);

    auto walk = [&](std::size_t start_seg, Eigen::Index from, std::vector<Eigen::Index>& chain) {
        std::size_t seg = start_seg;
        Eigen::Index at = from;
        for (;;) {
            used[seg] = true;
            const Eigen::Index next = segments[seg].first == at ? segments[seg].second : segments[seg].first;
            chain.push_back(next);
            at = next;
            std::size_t follow = segments.size();
            for (const std::size_t cand : touching[at]) if (!used[cand]) { follow = cand; break; }
            if (follow == segments.size()) return;
            seg = follow;
        }
    };

    std::vector<Polyline> out;
    auto emit = [&](const std::vector<Eigen::Index>& chain, bool closed) {
        Polyline line;
        line.closed = closed;
        const std::size_t count = closed ? chain.size() - 1 : chain.size();
        // Crossings snapped onto a shared grid node coincide; keep one copy.
        std::vector<Eigen::Vector2d> pts;
        for (std::size_t v = 0; v < count; ++v) {
            const Eigen::Vector2d q = crossing_point(chain[v]);
            if (pts.empty() || q != pts.back()) pts.push_back(q);
        }
        if (closed && pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
        line.vertices.resize(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t v = 0; v < pts.size(); ++v) line.vertices.row(static_cast<Eigen::Index>(v)) = pts[v].transpose();
        out.push_back(std::move(line));
    };

    // Open chains start at edges touched by a single segment (the box boundary).
    for (const auto& [id, segs] : touching) {
        if (segs.size() != 1 || used[segs[0]]) continue;
        std::vector<Eigen::Index> chain{id};
        walk(segs[0], id, chain);
        emit(chain, false);
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        std::vector<Eigen::Index> chain{segments[s].first};
        walk(s, segments[s].first, chain);
        emit(chain, chain.front() == chain.back());
    }
    return out;
}

}  // namespace condepth
