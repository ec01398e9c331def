#include "condepth/simlab.hpp"

#include <cmath>
#include <random>

#include "condepth/parallel.hpp"
#include "condepth/random.hpp"

namespace condepth {

void SimulationModel::validate() const {
    if (id < 1 || id > 4) throw InputError("simulation model id must be 1, 2, 3 or 4");
    if (!(a >= 0) || !std::isfinite(a)) throw InputError("heteroscedasticity strength a must be >= 0");
}

double variance_factor(const SimulationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& grid) {
    if (model.functional()) return 1.0 + model.a * l2_curve_norm(x, grid);
    return 1.0 + model.a * x.prod();
}

Dataset sample_model(const SimulationModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw InputError("sample size must be at least 1");
    const auto rows = static_cast<Eigen::Index>(n);
    const Eigen::Index p = model.response_dimension();
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(make_sigma(p)).matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    Eigen::MatrixXd x;
    Eigen::VectorXd grid;
    if (model.functional()) {
        grid = Eigen::VectorXd::LinSpaced(kCurveGridPoints, 0.0, 1.0);
        const Eigen::RowVectorXd shape = grid.array().exp().matrix().transpose();
        std::uniform_real_distribution<double> level(0.0, 1.0);
        x.resize(rows, kCurveGridPoints);
        for (Eigen::Index i = 0; i < rows; ++i) x.row(i) = level(rng) * shape;
    } else {
        std::uniform_real_distribution<double> coord(0.0, 1.5);
        x.resize(rows, 3);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index d = 0; d < 3; ++d) x(i, d) = coord(rng);
        }
    }

    Eigen::MatrixXd y(rows, p);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index d = 0; d < p; ++d) z(d) = normal(rng);
        const double factor = variance_factor(model, x.row(i).transpose(), grid);
        y.row(i) = (std::sqrt(factor) * (chol * z)).transpose();
    }

    std::vector<std::string> ynames;
    for (Eigen::Index d = 0; d < p; ++d) ynames.push_back("y" + std::to_string(d + 1));
    if (model.functional()) {
        return Dataset{std::move(y), CovariateSet::curves(std::move(x), std::move(grid)), ynames, {}};
    }
    return Dataset{std::move(y), CovariateSet::vectors(std::move(x)), ynames, {"x1", "x2", "x3"}};
}

void PowerStudyConfig::validate() const {
    if (replications < 1) throw InputError("at least one replication is required");
    if (permutations < 1) throw InputError("at least one permutation is required");
    if (models.empty() || sample_sizes.empty() || strengths.empty() || levels.empty()) {
        throw InputError("power study grid has an empty axis");
    }
    for (const int id : models) SimulationModel{id, 0.0}.validate();
    for (const double a : strengths) SimulationModel{1, a}.validate();
    for (const double level : levels) {
        if (!(level > 0 && level < 1)) throw InputError("nominal levels must lie in (0, 1)");
    }
    for (const std::size_t n : sample_sizes) {
        if (n < 2) throw InputError("power study sample sizes must be at least 2");
    }
    HeteroTestConfig{kind, depth, r, weights, permutations, seed, rule, threads}.validate();
}

PowerTable power_study(const PowerStudyConfig& config, const std::function<void(const PowerCell&)>& progress) {
    config.validate();
    PowerTable table;
    std::uint64_t cell_index = 0;
    for (const int id : config.models) {
        for (const std::size_t n : config.sample_sizes) {
            for (const double a : config.strengths) {
                const SimulationModel model{id, a};
                std::vector<double> p_values(config.replications, 1.0);
                parallel_for(config.replications, config.threads, [&](std::size_t rep) {
                    const Dataset data = sample_model(model, n, derive_seed(config.seed, {cell_index, rep, 0}));
                    HeteroTestConfig test{config.kind, config.depth, config.r, config.weights,
                                          config.permutations, derive_seed(config.seed, {cell_index, rep, 1}),
                                          config.rule, 1};
                    p_values[rep] = permutation_test(data, test).p_value;
                });
                for (const double level : config.levels) {
                    PowerCell cell;
                    cell.model = id;
                    cell.n = n;
                    cell.a = a;
                    cell.level = level;
                    cell.replications = config.replications;
                    cell.permutations = config.permutations;
                    cell.seed = derive_seed(config.seed, {cell_index});
                    for (const double pv : p_values) cell.rejections += pv <= level ? 1 : 0;
                    cell.rate = static_cast<double>(cell.rejections) / static_cast<double>(config.replications);
                    cell.p_values = p_values;
                    if (progress) progress(cell);
                    table.rows.push_back(std::move(cell));
                }
                ++cell_index;
            }
        }
    }
    return table;
}

}  // namespace condepth
