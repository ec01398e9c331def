#include "condepth/weights.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace condepth {

namespace {

void check_distances(const Eigen::Ref<const Eigen::VectorXd>& d) {
    if (d.size() == 0) throw InputError("no observations to weight");
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d(i)) || d(i) < 0) {
            throw InputError("distance " + std::to_string(i) + " is negative or non-finite");
        }
    }
}

WeightVector normalise(Eigen::VectorXd raw) {
    const double total = raw.sum();
    WeightVector w;
    w.weights = raw / total;
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (raw(i) > 0) w.support.push_back(i);
    }
    return w;
}

}  // namespace

std::size_t default_k(std::size_t n) {
    if (n == 0) throw InputError("default_k: n must be positive");
    const double l = std::log(static_cast<double>(n));
    return static_cast<std::size_t>(std::floor(l * l)) + 1;
}

double knn_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k) {
    check_distances(distances);
    const auto n = static_cast<std::size_t>(distances.size());
    if (k == 0 || k > n) {
        throw InputError("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
    }
    std::vector<double> sorted(distances.data(), distances.data() + distances.size());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    return sorted[k - 1];
}

double knn_bandwidth(const CovariateSet& covariates, const Eigen::Ref<const Eigen::VectorXd>& x,
                     std::size_t k) {
    return knn_bandwidth(covariates.distances_to(x), k);
}

WeightVector knn_weights(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k) {
    const double h = knn_bandwidth(distances, k);
    Eigen::VectorXd raw = (distances.array() <= h).cast<double>();
    return normalise(std::move(raw));
}

WeightVector knn_weights(const CovariateSet& covariates, const Eigen::Ref<const Eigen::VectorXd>& x,
                         std::size_t k) {
    return knn_weights(covariates.distances_to(x), k);
}

double kernel_value(Kernel kernel, double u) {
    if (u < 0 || u > 1) return 0.0;
    switch (kernel) {
        case Kernel::Box:
            return 1.0;
        case Kernel::Epanechnikov:
            return 0.75 * (1.0 - u * u);
    }
    return 0.0;
}

std::string to_string(Kernel kernel) {
    return kernel == Kernel::Box ? "box" : "epanechnikov";
}

Kernel parse_kernel(const std::string& name) {
    if (name == "box") return Kernel::Box;
    if (name == "epanechnikov") return Kernel::Epanechnikov;
    throw InputError("unknown kernel '" + name + "' (expected box or epanechnikov)");
}

WeightVector kernel_weights(const Eigen::Ref<const Eigen::VectorXd>& distances, Kernel kernel,
                            double h) {
    check_distances(distances);
    if (!(h > 0) || !std::isfinite(h)) throw InputError("bandwidth must be positive and finite");
    Eigen::VectorXd raw(distances.size());
    for (Eigen::Index i = 0; i < distances.size(); ++i) raw(i) = kernel_value(kernel, distances(i) / h);
    if (!(raw.sum() > 0)) {
        throw EmptyNeighborhoodError("no observation within bandwidth " + std::to_string(h) +
                                     "; widen the bandwidth");
    }
    return normalise(std::move(raw));
}

WeightVector kernel_weights(const CovariateSet& covariates,
                            const Eigen::Ref<const Eigen::VectorXd>& x, Kernel kernel, double h) {
    return kernel_weights(covariates.distances_to(x), kernel, h);
}

WeightedLocalSample make_local_sample(Eigen::MatrixXd points, Eigen::VectorXd weights) {
    if (points.rows() == 0 || points.cols() == 0) throw InputError("local sample is empty");
    if (weights.size() != points.rows()) {
        throw DimensionError("local sample has " + std::to_string(points.rows()) + " points but " +
                             std::to_string(weights.size()) + " weights");
    }
    detail::require_finite(points, "local sample points");
    if (!weights.allFinite() || (weights.array() <= 0).any()) {
        throw InputError("local sample weights must be positive and finite");
    }
    WeightedLocalSample s;
    s.weights = weights / weights.sum();
    s.points = std::move(points);
    s.source.resize(static_cast<std::size_t>(s.points.rows()));
    for (std::size_t i = 0; i < s.source.size(); ++i) s.source[i] = static_cast<Eigen::Index>(i);
    return s;
}

WeightedLocalSample make_local_sample(Eigen::MatrixXd points) {
    const Eigen::Index m = points.rows();
    return make_local_sample(std::move(points), Eigen::VectorXd::Constant(m, 1.0));
}

WeightedLocalSample local_sample(const Eigen::Ref<const Eigen::MatrixXd>& responses,
                                 const WeightVector& w) {
    if (responses.rows() != w.weights.size()) {
        throw DimensionError("responses have " + std::to_string(responses.rows()) + " rows but " +
                             std::to_string(w.weights.size()) + " weights were given");
    }
    if (w.support.empty()) throw EmptyNeighborhoodError("all weights are zero");
    const auto m = static_cast<Eigen::Index>(w.support.size());
    WeightedLocalSample s;
    s.points.resize(m, responses.cols());
    s.weights.resize(m);
    s.source = w.support;
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = w.support[static_cast<std::size_t>(r)];
        s.points.row(r) = responses.row(i);
        s.weights(r) = w.weights(i);
    }
    return s;
}

double sample_mass(const WeightedLocalSample& sample, const std::vector<bool>& mask) {
    double mass = 0.0;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        if (mask.at(static_cast<std::size_t>(i))) mass += sample.weights(i);
    }
    return mass;
}

WeightScheme WeightScheme::nearest_neighbors(std::size_t k) {
    WeightScheme s;
    s.mode = Mode::NearestNeighbors;
    s.k = k;
    return s;
}

WeightScheme WeightScheme::kernel_smoother(Kernel kernel, double bandwidth) {
    WeightScheme s;
    s.mode = Mode::Kernel;
    s.kernel = kernel;
    s.bandwidth = bandwidth;
    return s;
}

std::size_t WeightScheme::resolved_k(std::size_t n) const {
    return k == 0 ? default_k(n) : k;
}

NeighborCache::NeighborCache(const CovariateSet& covariates, const WeightScheme& scheme)
    : scheme_(scheme), distances_(covariates.distance_matrix()) {
    const auto n = static_cast<std::size_t>(covariates.size());
    if (scheme.mode == WeightScheme::Mode::NearestNeighbors) {
        k_ = scheme.resolved_k(n);
        if (k_ > n) {
            throw InputError("k = " + std::to_string(k_) + " exceeds the " + std::to_string(n) +
                             " observations");
        }
    }
    weights_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = distances_.row(static_cast<Eigen::Index>(i)).transpose();
        try {
            if (scheme.mode == WeightScheme::Mode::NearestNeighbors) {
                weights_.push_back(knn_weights(row, k_));
            } else {
                weights_.push_back(kernel_weights(row, scheme.kernel, scheme.bandwidth));
            }
        } catch (const EmptyNeighborhoodError& e) {
            throw EmptyNeighborhoodError("observation " + std::to_string(i) + ": " + e.what());
        }
    }
}

}  // namespace condepth
