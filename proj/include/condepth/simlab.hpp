#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "condepth/dataset.hpp"
#include "condepth/heterotest.hpp"

namespace condepth {

/// Sigma_p with unit diagonal and 0.5 everywhere else.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> make_sigma(Eigen::Index p) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (p < 1) throw InputError("make_sigma: p must be at least 1");
    Matrix sigma = Matrix::Constant(p, p, Scalar(0.5));
    sigma.diagonal().setOnes();
    return sigma;
}

/// Points on the functional-covariate grid (uniform on [0, 1]).
inline constexpr Eigen::Index kCurveGridPoints = 100;

/// One of the four heteroscedastic regression designs.
///
/// Models 1 and 2 draw X uniformly on [0, 1.5]^3 and scale the response
/// dispersion by 1 + a X1 X2 X3. Models 3 and 4 draw curves X(t) = B e^t with
/// B ~ U[0, 1] and scale by 1 + a ||X||_2. Odd models have p = 2, even p = 3.
struct SimulationModel {
    int id = 1;
    double a = 0.0;

    Eigen::Index response_dimension() const { return id % 2 == 1 ? 2 : 3; }
    bool functional() const { return id >= 3; }
    void validate() const;
};

/// Draws n observations; the same seed reproduces the same dataset exactly.
Dataset sample_model(const SimulationModel& model, std::size_t n, std::uint64_t seed);

/// Variance factor 1 + a g(X) of the model at covariate row x.
double variance_factor(const SimulationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& grid);

struct PowerStudyConfig {
    std::vector<int> models{1};
    std::vector<std::size_t> sample_sizes{100};
    std::vector<double> strengths{0.0};
    std::vector<double> levels{0.05};
    std::size_t replications = 200;
    std::size_t permutations = 200;
    std::uint64_t seed = 1;
    DepthKind kind = DepthKind::Halfspace;
    DepthConfig depth;
    double r = 0.5;
    WeightScheme weights = WeightScheme::nearest_neighbors();
    PValueRule rule = PValueRule::Strict;
    std::size_t threads = 1;

    void validate() const;
};

struct PowerCell {
    int model = 1;
    std::size_t n = 0;
    double a = 0.0;
    double level = 0.0;
    double rate = 0.0;
    std::size_t rejections = 0;
    std::size_t replications = 0;
    std::size_t permutations = 0;
    std::uint64_t seed = 0;       ///< seed of the (model, n, a) design cell
    std::vector<double> p_values; ///< one per replication, shared across levels
};

struct PowerTable {
    std::vector<PowerCell> rows;  ///< ordered by model, n, a, then level
};

/// Monte Carlo rejection rates of the permutation test.
///
/// Design cell c = (model, n, a) replication j draws its data from
/// derive_seed(seed, {c, j, 0}) and its permutations from
/// derive_seed(seed, {c, j, 1}); replications run in parallel and are merged
/// by index. `progress`, when set, is called after each finished design cell.
PowerTable power_study(const PowerStudyConfig& config,
                       const std::function<void(const PowerCell&)>& progress = {});

}  // namespace condepth
