#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

#include "condepth/error.hpp"

namespace condepth {

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& v, const char* what) {
    if (!v.allFinite()) throw InputError(std::string(what) + " contains non-finite entries");
}

}  // namespace detail

/// Euclidean distance between two coordinate vectors of equal length.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean_distance(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("euclidean_distance: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    }
    detail::require_finite(a, "euclidean_distance: first argument");
    detail::require_finite(b, "euclidean_distance: second argument");
    return (a - b).norm();
}

/// Checks that a sampling grid has at least two finite, strictly increasing points.
void validate_grid(const Eigen::Ref<const Eigen::VectorXd>& grid);

/// Trapezoid-rule quadrature weights for a strictly increasing grid.
///
/// For samples f on the grid, sum_j w_j f_j equals the trapezoid integral of f.
Eigen::VectorXd trapezoid_weights(const Eigen::Ref<const Eigen::VectorXd>& grid);

/// L2 distance between two curves sampled on a shared grid.
///
/// The integral of (f - g)^2 is taken with the trapezoid rule on the stored
/// grid, which is exact for piecewise-linear curves.
template <typename DerivedF, typename DerivedG>
typename DerivedF::Scalar l2_curve_distance(const Eigen::MatrixBase<DerivedF>& f,
                                            const Eigen::MatrixBase<DerivedG>& g,
                                            const Eigen::Ref<const Eigen::VectorXd>& grid) {
    using Scalar = typename DerivedF::Scalar;
    validate_grid(grid);
    if (f.size() != grid.size() || g.size() != grid.size()) {
        throw DimensionError("l2_curve_distance: curve lengths " + std::to_string(f.size()) + "/" +
                             std::to_string(g.size()) + " do not match grid length " +
                             std::to_string(grid.size()));
    }
    detail::require_finite(f, "l2_curve_distance: first curve");
    detail::require_finite(g, "l2_curve_distance: second curve");
    Scalar integral(0);
    for (Eigen::Index j = 0; j + 1 < grid.size(); ++j) {
        const Scalar d0 = f(j) - g(j);
        const Scalar d1 = f(j + 1) - g(j + 1);
        integral += Scalar(grid(j + 1) - grid(j)) * (d0 * d0 + d1 * d1) / Scalar(2);
    }
    using std::sqrt;
    return sqrt(integral);
}

/// L2 norm of a sampled curve (distance to the zero curve).
double l2_curve_norm(const Eigen::Ref<const Eigen::VectorXd>& f,
                     const Eigen::Ref<const Eigen::VectorXd>& grid);

enum class CovariateKind { Vector, Curve, Custom };

/// User-supplied metric for covariate spaces beyond the two built-ins.
using DistanceFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&,
                                        const Eigen::Ref<const Eigen::VectorXd>&)>;

/// The n covariate values of a dataset together with their metric.
///
/// Rows hold either coordinate vectors (Euclidean metric) or curves sampled
/// on one shared grid (trapezoid L2 metric).
class CovariateSet {
public:
    static CovariateSet vectors(Eigen::MatrixXd rows);
    static CovariateSet curves(Eigen::MatrixXd values, Eigen::VectorXd grid);
    static CovariateSet custom(Eigen::MatrixXd rows, DistanceFn metric);

    Eigen::Index size() const { return values_.rows(); }
    Eigen::Index dimension() const { return values_.cols(); }
    CovariateKind kind() const { return kind_; }
    const Eigen::MatrixXd& values() const { return values_; }
    /// Shared sampling grid; empty unless kind() == Curve.
    const Eigen::VectorXd& grid() const { return grid_; }
    /// Quadrature weights per column: trapezoid weights for curves, ones otherwise.
    const Eigen::VectorXd& column_weights() const { return column_weights_; }

    double distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) const;

    /// Distances from x to every stored covariate value.
    Eigen::VectorXd distances_to(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Symmetric n x n matrix of pairwise distances.
    Eigen::MatrixXd distance_matrix() const;

private:
    CovariateSet() = default;

    CovariateKind kind_ = CovariateKind::Vector;
    Eigen::MatrixXd values_;
    Eigen::VectorXd grid_;
    Eigen::VectorXd column_weights_;
    DistanceFn metric_;
};

/// Scores of the covariates on their leading principal components.
struct PrincipalScores {
    Eigen::MatrixXd scores;     ///< n x components
    Eigen::VectorXd variances;  ///< eigenvalues of the dispersion, descending
    bool degenerate = false;    ///< true when the leading dispersion vanishes
};

/// Principal-component scores of the covariate sample dispersion.
///
/// Curves use the trapezoid-weighted covariance operator so scores are
/// L2 inner products with the eigenfunctions. Eigenvector signs are fixed so
/// the largest-magnitude loading is positive. Components with zero variance
/// produce zero scores and set `degenerate` when the first one does.
PrincipalScores principal_scores(const CovariateSet& covariates, Eigen::Index components = 2);

}  // namespace condepth
