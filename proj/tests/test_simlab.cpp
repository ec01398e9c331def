#include <doctest.h>

#include <cmath>

#include "condepth/simlab.hpp"

using namespace condepth;

TEST_CASE("make_sigma") {
    Eigen::Matrix2d two;
    two << 1, 0.5, 0.5, 1;
    CHECK(make_sigma(2) == Eigen::MatrixXd(two));
    const Eigen::MatrixXd three = make_sigma(3);
    CHECK(three.diagonal().isOnes());
    CHECK(three(0, 2) == 0.5);
    CHECK(three(2, 1) == 0.5);
    CHECK(make_sigma(1) == Eigen::MatrixXd::Ones(1, 1));
    CHECK(make_sigma<float>(2)(0, 1) == 0.5f);
    for (Eigen::Index p = 1; p <= 10; ++p) {
        CHECK(Eigen::LLT<Eigen::MatrixXd>(make_sigma(p)).info() == Eigen::Success);
    }
    CHECK_THROWS_AS(make_sigma(0), InputError);
}

TEST_CASE("model shapes and covariates") {
    for (int id = 1; id <= 4; ++id) {
        const SimulationModel model{id, 1.0};
        const Dataset data = sample_model(model, 50, 3);
        CHECK(data.size() == 50);
        CHECK(data.response_dimension() == (id % 2 == 1 ? 2 : 3));
        if (model.functional()) {
            CHECK(data.covariates.kind() == CovariateKind::Curve);
            CHECK(data.covariates.dimension() == kCurveGridPoints);
            CHECK(data.covariates.grid()(0) == 0.0);
            CHECK(data.covariates.grid()(kCurveGridPoints - 1) == 1.0);
        } else {
            CHECK(data.covariates.kind() == CovariateKind::Vector);
            CHECK(data.covariates.values().minCoeff() >= 0.0);
            CHECK(data.covariates.values().maxCoeff() <= 1.5);
        }
    }
    CHECK_THROWS_AS(sample_model({5, 0.0}, 10, 1), InputError);
    CHECK_THROWS_AS(sample_model({1, -1.0}, 10, 1), InputError);
    CHECK_THROWS_AS(sample_model({1, 0.0}, 0, 1), InputError);
}

TEST_CASE("functional covariates are B e^t") {
    const Dataset data = sample_model({3, 2.0}, 40, 8);
    const Eigen::VectorXd& grid = data.covariates.grid();
    const double norm_factor = std::sqrt((std::exp(2.0) - 1.0) / 2.0);
    CHECK(std::abs(norm_factor - 1.787328) < 1e-5);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const Eigen::VectorXd curve = data.covariates.values().row(i).transpose();
        const double b = curve(0);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
        CHECK(curve(kCurveGridPoints - 1) == doctest::Approx(b * std::exp(1.0)));
        CHECK(std::abs(l2_curve_norm(curve, grid) - b * norm_factor) <= 1e-4 * (1 + b));
    }
}

TEST_CASE("same seed, same dataset") {
    for (int id = 1; id <= 4; ++id) {
        const Dataset a = sample_model({id, 4.0}, 30, 12);
        const Dataset b = sample_model({id, 4.0}, 30, 12);
        CHECK(a.responses == b.responses);
        CHECK(a.covariates.values() == b.covariates.values());
        CHECK(sample_model({id, 4.0}, 30, 13).responses != a.responses);
    }
}

TEST_CASE("conditional covariance is (1 + a g(X)) Sigma") {
    for (const int id : {1, 4}) {
        const SimulationModel model{id, 4.0};
        const Dataset data = sample_model(model, 100000, 2024);
        const Eigen::Index p = data.response_dimension();
        Eigen::MatrixXd standardized = data.responses;
        for (Eigen::Index i = 0; i < data.size(); ++i) {
            const double factor = variance_factor(model, data.covariates.values().row(i).transpose(),
                                                  data.covariates.grid());
            standardized.row(i) /= std::sqrt(factor);
        }
        const Eigen::MatrixXd cov = standardized.transpose() * standardized / static_cast<double>(data.size());
        const Eigen::MatrixXd sigma = make_sigma(p);
        CHECK(((cov - sigma).array() / sigma.array()).abs().maxCoeff() < 0.03);

        // Raw responses in the top factor decile are more dispersed than in the bottom one.
        Eigen::VectorXd factors(data.size());
        for (Eigen::Index i = 0; i < data.size(); ++i) {
            factors(i) = variance_factor(model, data.covariates.values().row(i).transpose(), data.covariates.grid());
        }
        double lo = 0, hi = 0, nlo = 0, nhi = 0;
        const double lo_cut = 1.0 + 0.1 * (factors.maxCoeff() - 1.0), hi_cut = 1.0 + 0.5 * (factors.maxCoeff() - 1.0);
        for (Eigen::Index i = 0; i < data.size(); ++i) {
            if (factors(i) <= lo_cut) {
                lo += data.responses(i, 0) * data.responses(i, 0) / factors(i);
                nlo += 1;
            } else if (factors(i) >= hi_cut) {
                hi += data.responses(i, 0) * data.responses(i, 0) / factors(i);
                nhi += 1;
            }
        }
        CHECK(lo / nlo == doctest::Approx(1.0).epsilon(0.05));
        CHECK(hi / nhi == doctest::Approx(1.0).epsilon(0.05));
    }
    const Dataset null = sample_model({2, 0.0}, 20000, 5);
    const Eigen::MatrixXd cov = null.responses.transpose() * null.responses / 20000.0;
    CHECK((cov - make_sigma(3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("power study bookkeeping") {
    PowerStudyConfig cfg;
    cfg.models = {1};
    cfg.sample_sizes = {25};
    cfg.strengths = {0.0, 8.0};
    cfg.levels = {0.05, 0.10};
    cfg.replications = 6;
    cfg.permutations = 19;
    cfg.seed = 42;
    std::size_t progress_calls = 0;
    const PowerTable table = power_study(cfg, [&](const PowerCell&) { ++progress_calls; });
    REQUIRE(table.rows.size() == 4);
    CHECK(progress_calls == 4);
    CHECK(table.rows[0].a == 0.0);
    CHECK(table.rows[1].level == 0.10);
    CHECK(table.rows[2].a == 8.0);
    CHECK(table.rows[0].p_values == table.rows[1].p_values);
    CHECK(table.rows[0].seed != table.rows[2].seed);
    for (const auto& row : table.rows) {
        CHECK(row.rate >= 0.0);
        CHECK(row.rate <= 1.0);
        CHECK(row.replications == 6);
        CHECK(row.permutations == 19);
        CHECK(row.rejections <= 6);
    }
    CHECK(table.rows[1].rejections >= table.rows[0].rejections);

    cfg.threads = 3;
    const PowerTable threaded = power_study(cfg);
    for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(threaded.rows[i].p_values == table.rows[i].p_values);

    cfg.levels = {1.5};
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.levels = {0.05};
    cfg.models = {7};
    CHECK_THROWS_AS(cfg.validate(), InputError);
}
