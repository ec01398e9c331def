#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "condepth/metrics.hpp"

namespace condepth {

/// Nearest-neighbour count floor((ln n)^2) + 1.
///
/// This is the rule under which the nearest-neighbour weights give
/// consistent conditional depth estimates.
std::size_t default_k(std::size_t n);

/// Regression weights W_i(x) over all n observations.
struct WeightVector {
    Eigen::VectorXd weights;
    std::vector<Eigen::Index> support;  ///< indices with weight > 0, ascending
};

/// The k-th order statistic of the distances: the smallest radius holding k points.
double knn_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k);
double knn_bandwidth(const CovariateSet& covariates, const Eigen::Ref<const Eigen::VectorXd>& x,
                     std::size_t k);

/// Uniform weights over every observation within the k-NN radius.
///
/// All points tied at the cutoff radius are included, so the support can
/// exceed k.
WeightVector knn_weights(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k);
WeightVector knn_weights(const CovariateSet& covariates, const Eigen::Ref<const Eigen::VectorXd>& x,
                         std::size_t k);

enum class Kernel { Box, Epanechnikov };

double kernel_value(Kernel kernel, double u);
std::string to_string(Kernel kernel);
Kernel parse_kernel(const std::string& name);

/// Nadaraya-Watson weights K(d_i / h) / sum_j K(d_j / h).
///
/// Throws EmptyNeighborhoodError when every kernel value is zero.
WeightVector kernel_weights(const Eigen::Ref<const Eigen::VectorXd>& distances, Kernel kernel,
                            double h);
WeightVector kernel_weights(const CovariateSet& covariates,
                            const Eigen::Ref<const Eigen::VectorXd>& x, Kernel kernel, double h);

/// The sample conditional measure: responses with positive weight.
struct WeightedLocalSample {
    Eigen::MatrixXd points;             ///< m x p, one response per row
    Eigen::VectorXd weights;            ///< m positive weights summing to one
    std::vector<Eigen::Index> source;   ///< dataset row of each point

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dimension() const { return points.cols(); }
};

/// Builds a validated local sample from explicit points and weights.
///
/// Weights must be positive; they are renormalised to sum to one.
WeightedLocalSample make_local_sample(Eigen::MatrixXd points, Eigen::VectorXd weights);

/// Equal-weight local sample over the given points.
WeightedLocalSample make_local_sample(Eigen::MatrixXd points);

/// Restricts the responses to the support of w.
WeightedLocalSample local_sample(const Eigen::Ref<const Eigen::MatrixXd>& responses,
                                 const WeightVector& w);

/// Weighted mass of the rows of `sample` selected by `mask`.
double sample_mass(const WeightedLocalSample& sample, const std::vector<bool>& mask);

/// How the weights are built: k nearest neighbours or a kernel with fixed bandwidth.
struct WeightScheme {
    enum class Mode { NearestNeighbors, Kernel };

    Mode mode = Mode::NearestNeighbors;
    std::size_t k = 0;  ///< 0 selects default_k(n)
    Kernel kernel = Kernel::Box;
    double bandwidth = 0.0;

    static WeightScheme nearest_neighbors(std::size_t k = 0);
    static WeightScheme kernel_smoother(Kernel kernel, double bandwidth);

    /// k actually used for a dataset of n rows.
    std::size_t resolved_k(std::size_t n) const;
};

/// Weights at every observed covariate value X_i, built once from the covariates.
///
/// Depends on covariates only, so it is reused unchanged when responses are
/// permuted.
class NeighborCache {
public:
    NeighborCache(const CovariateSet& covariates, const WeightScheme& scheme);

    std::size_t size() const { return weights_.size(); }
    const WeightVector& at(std::size_t i) const { return weights_.at(i); }
    const Eigen::MatrixXd& distances() const { return distances_; }
    const WeightScheme& scheme() const { return scheme_; }
    std::size_t k() const { return k_; }

private:
    WeightScheme scheme_;
    std::size_t k_ = 0;
    Eigen::MatrixXd distances_;
    std::vector<WeightVector> weights_;
};

}  // namespace condepth
