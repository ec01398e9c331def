#include "condepth/metrics.hpp"

#include <algorithm>
#include <utility>

namespace condepth {

void validate_grid(const Eigen::Ref<const Eigen::VectorXd>& grid) {
    if (grid.size() < 2) throw DimensionError("grid needs at least two points");
    detail::require_finite(grid, "grid");
    for (Eigen::Index j = 0; j + 1 < grid.size(); ++j) {
        if (!(grid(j) < grid(j + 1))) {
            throw InputError("grid is not strictly increasing at position " + std::to_string(j + 1));
        }
    }
}

Eigen::VectorXd trapezoid_weights(const Eigen::Ref<const Eigen::VectorXd>& grid) {
    validate_grid(grid);
    const Eigen::Index m = grid.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j + 1 < m; ++j) {
        const double half = 0.5 * (grid(j + 1) - grid(j));
        w(j) += half;
        w(j + 1) += half;
    }
    return w;
}

double l2_curve_norm(const Eigen::Ref<const Eigen::VectorXd>& f,
                     const Eigen::Ref<const Eigen::VectorXd>& grid) {
    return l2_curve_distance(f, Eigen::VectorXd::Zero(f.size()), grid);
}

CovariateSet CovariateSet::vectors(Eigen::MatrixXd rows) {
    if (rows.rows() == 0 || rows.cols() == 0) throw InputError("covariate matrix is empty");
    detail::require_finite(rows, "covariates");
    CovariateSet set;
    set.kind_ = CovariateKind::Vector;
    set.column_weights_ = Eigen::VectorXd::Ones(rows.cols());
    set.values_ = std::move(rows);
    return set;
}

CovariateSet CovariateSet::curves(Eigen::MatrixXd values, Eigen::VectorXd grid) {
    if (values.rows() == 0) throw InputError("curve matrix is empty");
    if (values.cols() != grid.size()) {
        throw DimensionError("curves have " + std::to_string(values.cols()) +
                             " samples but the grid has " + std::to_string(grid.size()) + " points");
    }
    detail::require_finite(values, "curves");
    CovariateSet set;
    set.kind_ = CovariateKind::Curve;
    set.column_weights_ = trapezoid_weights(grid);
    set.values_ = std::move(values);
    set.grid_ = std::move(grid);
    return set;
}

CovariateSet CovariateSet::custom(Eigen::MatrixXd rows, DistanceFn metric) {
    if (!metric) throw InputError("custom covariate metric is empty");
    CovariateSet set = vectors(std::move(rows));
    set.kind_ = CovariateKind::Custom;
    set.metric_ = std::move(metric);
    return set;
}

double CovariateSet::distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
    switch (kind_) {
        case CovariateKind::Vector:
            return euclidean_distance(a, b);
        case CovariateKind::Curve:
            return l2_curve_distance(a, b, grid_);
        case CovariateKind::Custom:
            return metric_(a, b);
    }
    return 0.0;
}

Eigen::VectorXd CovariateSet::distances_to(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dimension()) {
        throw DimensionError("query covariate has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(dimension()));
    }
    detail::require_finite(x, "query covariate");
    const Eigen::Index n = size();
    Eigen::VectorXd d(n);
    if (kind_ == CovariateKind::Custom) {
        for (Eigen::Index i = 0; i < n; ++i) d(i) = metric_(x, values_.row(i).transpose());
        return d;
    }
    // sum_j w_j (x_j - v_ij)^2 reproduces the trapezoid rule term by term.
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = std::sqrt(
            (column_weights_.array() * (values_.row(i).transpose() - x).array().square()).sum());
    }
    return d;
}

Eigen::MatrixXd CovariateSet::distance_matrix() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = values_.row(i).transpose();
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v;
            if (kind_ == CovariateKind::Custom) {
                v = metric_(xi, values_.row(j).transpose());
            } else {
                v = std::sqrt((column_weights_.array() *
                               (values_.row(j).transpose() - xi).array().square())
                                  .sum());
            }
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

PrincipalScores principal_scores(const CovariateSet& covariates, Eigen::Index components) {
    const Eigen::Index n = covariates.size();
    const Eigen::MatrixXd& x = covariates.values();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::VectorXd root_w = covariates.column_weights().cwiseSqrt();
    const Eigen::MatrixXd z = (x.rowwise() - mean) * root_w.asDiagonal();
    const Eigen::MatrixXd dispersion = (z.transpose() * z) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dispersion);
    if (solver.info() != Eigen::Success) throw NumericalError("covariate dispersion eigensolve failed");

    const Eigen::Index dim = dispersion.rows();
    const Eigen::Index kept = std::min(components, dim);
    const double scale = std::max(1.0, dispersion.diagonal().cwiseAbs().maxCoeff());
    const double zero_tol = 1e-12 * scale;

    PrincipalScores out;
    out.scores = Eigen::MatrixXd::Zero(n, components);
    out.variances = Eigen::VectorXd::Zero(components);
    for (Eigen::Index c = 0; c < kept; ++c) {
        const Eigen::Index col = dim - 1 - c;  // eigenvalues come out ascending
        const double variance = std::max(0.0, solver.eigenvalues()(col));
        if (variance <= zero_tol) {
            if (c == 0) out.degenerate = true;
            continue;
        }
        Eigen::VectorXd v = solver.eigenvectors().col(col);
        Eigen::Index lead = 0;
        v.cwiseAbs().maxCoeff(&lead);
        if (v(lead) < 0) v = -v;
        out.variances(c) = variance;
        out.scores.col(c) = z * v;
    }
    return out;
}

}  // namespace condepth
