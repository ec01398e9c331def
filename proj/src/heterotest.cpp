#include "condepth/heterotest.hpp"

#include <algorithm>

#include "condepth/parallel.hpp"
#include "condepth/random.hpp"
#include "condepth/spread.hpp"

namespace condepth {

std::string to_string(PValueRule rule) { return rule == PValueRule::Strict ? "strict" : "addone"; }

PValueRule parse_p_value_rule(const std::string& name) {
    if (name == "strict") return PValueRule::Strict;
    if (name == "addone") return PValueRule::AddOne;
    throw InputError("unknown p-value rule '" + name + "' (expected strict or addone)");
}

double permutation_p_value(double observed, const std::vector<double>& permuted, PValueRule rule) {
    if (permuted.empty()) throw InputError("no permutation statistics");
    const auto b = static_cast<double>(permuted.size());
    if (rule == PValueRule::Strict) {
        const auto larger = std::count_if(permuted.begin(), permuted.end(), [&](double t) { return t > observed; });
        return static_cast<double>(larger) / b;
    }
    const auto at_least = std::count_if(permuted.begin(), permuted.end(), [&](double t) { return t >= observed; });
    return (1.0 + static_cast<double>(at_least)) / (b + 1.0);
}

void HeteroTestConfig::validate() const {
    depth.validate();
    if (!(r > 0.0 && r < 1.0)) throw InputError("r must lie in (0, 1)");
    if (permutations < 1) throw InputError("at least one permutation is required");
    if (weights.mode == WeightScheme::Mode::Kernel && !(weights.bandwidth > 0)) {
        throw InputError("kernel weights need a positive bandwidth");
    }
}

Eigen::VectorXd delta_profile(const Eigen::Ref<const Eigen::MatrixXd>& responses, const NeighborCache& cache,
                              DepthKind kind, const DepthConfig& cfg, double r,
                              const std::vector<std::size_t>& order) {
    const auto n = static_cast<Eigen::Index>(cache.size());
    if (responses.rows() != n) {
        throw DimensionError("responses have " + std::to_string(responses.rows()) + " rows, weights cover " +
                             std::to_string(n));
    }
    if (!order.empty() && order.size() != cache.size()) throw DimensionError("permutation length mismatch");
    Eigen::VectorXd profile(n);
    WeightedLocalSample sample;
    for (Eigen::Index i = 0; i < n; ++i) {
        const WeightVector& w = cache.at(static_cast<std::size_t>(i));
        const auto m = static_cast<Eigen::Index>(w.support.size());
        if (m == 0) throw EmptyNeighborhoodError("observation " + std::to_string(i) + " has an empty neighbourhood");
        sample.points.resize(m, responses.cols());
        sample.weights.resize(m);
        sample.source = w.support;
        for (Eigen::Index s = 0; s < m; ++s) {
            const auto j = static_cast<std::size_t>(w.support[static_cast<std::size_t>(s)]);
            const auto row = static_cast<Eigen::Index>(order.empty() ? j : order[j]);
            sample.points.row(s) = responses.row(row);
            sample.weights(s) = w.weights(static_cast<Eigen::Index>(j));
        }
        profile(i) = spread_diameter(sample, kind, cfg, r).value;
    }
    return profile;
}

Eigen::VectorXd delta_profile(const Dataset& data, DepthKind kind, const DepthConfig& cfg, double r,
                              const WeightScheme& weights) {
    data.validate();
    const NeighborCache cache(data.covariates, weights);
    return delta_profile(data.responses, cache, kind, cfg, r);
}

HeteroTestResult permutation_test(const Eigen::Ref<const Eigen::MatrixXd>& responses, const NeighborCache& cache,
                                  const HeteroTestConfig& config) {
    config.validate();
    HeteroTestResult out;
    out.rule = config.rule;
    out.permutations = config.permutations;
    out.seed = config.seed;
    out.r = config.r;
    out.kind = config.kind;
    out.weights = config.weights;
    out.k = cache.k();
    out.depth_exact = depth_is_exact(config.kind, responses.cols());

    out.observed_profile = delta_profile(responses, cache, config.kind, config.depth, config.r);
    out.observed_t = t_statistic(out.observed_profile);

    const std::size_t n = cache.size();
    out.perm_ts.assign(config.permutations, 0.0);
    parallel_for(config.permutations, config.threads, [&](std::size_t b) {
        const auto order = random_permutation(n, derive_seed(config.seed, {b}));
        out.perm_ts[b] = t_statistic(delta_profile(responses, cache, config.kind, config.depth, config.r, order));
    });
    out.p_value = permutation_p_value(out.observed_t, out.perm_ts, config.rule);

    const bool all_equal = std::all_of(out.perm_ts.begin(), out.perm_ts.end(),
                                       [&](double t) { return t == out.observed_t; });
    if (all_equal) {
        out.warnings.push_back(
            "degenerate data: the observed and every permuted statistic are equal (T = " +
            format_exact(out.observed_t) +
            "); the strict p-value is 0 by construction, the addone rule gives 1");
    }
    if (!out.depth_exact) {
        out.warnings.push_back("depth '" + to_string(config.kind) + "' is approximated by a scan over " +
                               std::to_string(config.depth.direction_count) + " directions at p = " +
                               std::to_string(responses.cols()));
    }
    return out;
}

HeteroTestResult permutation_test(const Dataset& data, const HeteroTestConfig& config) {
    config.validate();
    data.validate();
    const NeighborCache cache(data.covariates, config.weights);
    return permutation_test(data.responses, cache, config);
}

}  // namespace condepth
