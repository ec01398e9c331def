#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "condepth/dataset.hpp"
#include "condepth/depth.hpp"
#include "condepth/weights.hpp"

namespace condepth {

/// T_n = (1/n) sum_i (Delta_i - mean Delta)^2.
template <typename Derived>
typename Derived::Scalar t_statistic(const Eigen::MatrixBase<Derived>& deltas) {
    if (deltas.size() == 0) throw InputError("t_statistic: empty spread profile");
    if (!deltas.allFinite()) throw InputError("t_statistic: non-finite spread value");
    const auto centred = (deltas.array() - deltas.mean()).matrix();
    return centred.squaredNorm() / static_cast<typename Derived::Scalar>(deltas.size());
}

/// Strict counts permuted statistics strictly above the observed one, over B.
/// AddOne is (1 + #{T_b >= T_obs}) / (B + 1).
enum class PValueRule { Strict, AddOne };

std::string to_string(PValueRule rule);
PValueRule parse_p_value_rule(const std::string& name);

double permutation_p_value(double observed, const std::vector<double>& permuted, PValueRule rule);

struct HeteroTestConfig {
    DepthKind kind = DepthKind::Halfspace;
    DepthConfig depth;
    double r = 0.5;
    WeightScheme weights = WeightScheme::nearest_neighbors();
    std::size_t permutations = 500;
    std::uint64_t seed = 1;
    PValueRule rule = PValueRule::Strict;
    std::size_t threads = 1;  ///< 0 uses every hardware thread

    void validate() const;
};

struct HeteroTestResult {
    double observed_t = 0.0;
    std::vector<double> perm_ts;
    double p_value = 0.0;
    PValueRule rule = PValueRule::Strict;
    std::size_t permutations = 0;
    std::uint64_t seed = 0;
    double r = 0.0;
    DepthKind kind = DepthKind::Halfspace;
    WeightScheme weights;
    std::size_t k = 0;                ///< resolved neighbour count (nearest-neighbour scheme)
    bool depth_exact = true;          ///< false when the depth used a direction scan
    Eigen::VectorXd observed_profile; ///< Delta_n(r | X_i) for the unpermuted data
    std::vector<std::string> warnings;
};

/// Delta_n(r | X_i) for every observation, with responses taken in the order
/// given by `order` (order[j] is the response row paired with X_j; empty = identity).
Eigen::VectorXd delta_profile(const Eigen::Ref<const Eigen::MatrixXd>& responses, const NeighborCache& cache,
                              DepthKind kind, const DepthConfig& cfg, double r,
                              const std::vector<std::size_t>& order = {});

Eigen::VectorXd delta_profile(const Dataset& data, DepthKind kind, const DepthConfig& cfg, double r,
                              const WeightScheme& weights);

/// Permutation test of H0: Delta(r | x) constant in x.
///
/// Permutation b reshuffles the responses with a Fisher-Yates stream seeded
/// from (seed, b), so results do not depend on the number of workers.
HeteroTestResult permutation_test(const Dataset& data, const HeteroTestConfig& config);
HeteroTestResult permutation_test(const Eigen::Ref<const Eigen::MatrixXd>& responses, const NeighborCache& cache,
                                  const HeteroTestConfig& config);

}  // namespace condepth
