#include <doctest.h>

#include <cmath>
#include <random>

#include "condepth/metrics.hpp"
#include "oracles.hpp"

using namespace condepth;

TEST_CASE("euclidean_distance basic values") {
    CHECK(euclidean_distance(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)) == 0.0);
    CHECK(euclidean_distance(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(euclidean_distance(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(2, 3, 4)) ==
          doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
}

TEST_CASE("euclidean_distance works on float and expression arguments") {
    const Eigen::Vector2f a(0.f, 0.f);
    const Eigen::Vector2f b(3.f, 4.f);
    CHECK(euclidean_distance(a, b) == doctest::Approx(5.0f));
    const Eigen::MatrixXd m = (Eigen::MatrixXd(2, 2) << 0, 0, 6, 8).finished();
    CHECK(euclidean_distance(m.row(0), m.row(1)) == doctest::Approx(10.0));
}

TEST_CASE("euclidean_distance rejects bad input") {
    CHECK_THROWS_AS(euclidean_distance(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), DimensionError);
    CHECK_THROWS_AS(euclidean_distance(Eigen::Vector2d(NAN, 0), Eigen::Vector2d(0, 0)), InputError);
}

TEST_CASE("metric axioms on random triples") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const Eigen::MatrixXd pts = oracle::gaussian_points(rng, 3, 4);
        const double ab = euclidean_distance(pts.row(0), pts.row(1));
        const double ba = euclidean_distance(pts.row(1), pts.row(0));
        const double bc = euclidean_distance(pts.row(1), pts.row(2));
        const double ac = euclidean_distance(pts.row(0), pts.row(2));
        CHECK(ab == ba);
        CHECK(ab >= 0);
        CHECK(ac <= ab + bc + 1e-12);
    }
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(30, 0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        const Eigen::MatrixXd c = oracle::gaussian_points(rng, 3, 30);
        const double fg = l2_curve_distance(c.row(0), c.row(1), grid);
        CHECK(fg == l2_curve_distance(c.row(1), c.row(0), grid));
        CHECK(l2_curve_distance(c.row(0), c.row(0), grid) == 0.0);
        CHECK(l2_curve_distance(c.row(0), c.row(2), grid) <=
              fg + l2_curve_distance(c.row(1), c.row(2), grid) + 1e-12);
    }
}

TEST_CASE("l2_curve_distance closed forms") {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
    CHECK(l2_curve_distance(Eigen::VectorXd::Ones(11), Eigen::VectorXd::Zero(11), grid) ==
          doctest::Approx(1.0).epsilon(1e-14));

    const Eigen::VectorXd dense = Eigen::VectorXd::LinSpaced(2001, 0.0, 1.0);
    const double d = l2_curve_distance(dense, Eigen::VectorXd::Zero(2001), dense);
    CHECK(std::abs(d - std::sqrt(1.0 / 3.0)) < 1e-6);
}

TEST_CASE("trapezoid error shrinks quadratically under refinement") {
    // f(t) = t^2 on [0, 1]: integral of f^2 = 1/5.
    double previous = 0.0;
    for (int m : {11, 21, 41, 81}) {
        const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
        const Eigen::VectorXd f = grid.array().square();
        const double err = std::abs(std::pow(l2_curve_norm(f, grid), 2) - 0.2);
        if (previous > 0) CHECK(err <= previous / 3.5);
        previous = err;
    }
}

TEST_CASE("l2 metric supports non-uniform grids and exact piecewise-linear curves") {
    Eigen::VectorXd grid(4);
    grid << 0.0, 0.1, 0.5, 1.0;
    // f - g = t is linear; the integrand t^2 is not, so compare to the composite trapezoid sum.
    const double expected = 0.5 * (0.1 * (0 + 0.01) + 0.4 * (0.01 + 0.25) + 0.5 * (0.25 + 1.0));
    CHECK(l2_curve_distance(grid, Eigen::VectorXd::Zero(4), grid) == doctest::Approx(std::sqrt(expected)));
    const Eigen::VectorXd w = trapezoid_weights(grid);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w(0) == doctest::Approx(0.05));
}

TEST_CASE("grid and curve validation") {
    Eigen::VectorXd bad(3);
    bad << 0.0, 0.5, 0.5;
    CHECK_THROWS_AS(validate_grid(bad), InputError);
    CHECK_THROWS_AS(validate_grid(Eigen::VectorXd::Zero(1)), DimensionError);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    CHECK_THROWS_AS(l2_curve_distance(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(5), grid), DimensionError);
    CHECK_THROWS_AS(CovariateSet::curves(Eigen::MatrixXd::Zero(2, 4), grid), DimensionError);
}

TEST_CASE("CovariateSet distance caches agree with the free functions") {
    std::mt19937_64 rng(11);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
    const Eigen::MatrixXd curves = oracle::gaussian_points(rng, 6, 20);
    const auto set = CovariateSet::curves(curves, grid);
    const Eigen::MatrixXd d = set.distance_matrix();
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(d(i, j) == doctest::Approx(l2_curve_distance(curves.row(i), curves.row(j), grid)).epsilon(1e-13));
        }
    }
    const auto vec = CovariateSet::vectors(oracle::gaussian_points(rng, 5, 3));
    const Eigen::VectorXd to0 = vec.distances_to(vec.values().row(0).transpose());
    CHECK(to0(0) == 0.0);
    CHECK(to0(3) == doctest::Approx(euclidean_distance(vec.values().row(0), vec.values().row(3))));

    const auto manhattan = CovariateSet::custom(vec.values(), [](const auto& a, const auto& b) {
        return (a - b).cwiseAbs().sum();
    });
    CHECK(manhattan.distance_matrix()(1, 2) == doctest::Approx((vec.values().row(1) - vec.values().row(2)).cwiseAbs().sum()));
}

TEST_CASE("principal scores of vectors and curves") {
    // Points on a line along (1, 1): one nonzero component.
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 1, 1, 2, 2, 3, 3;
    const auto ps = principal_scores(CovariateSet::vectors(x));
    CHECK_FALSE(ps.degenerate);
    CHECK(ps.variances(0) == doctest::Approx(2.5));
    CHECK(std::abs(ps.variances(1)) < 1e-12);
    CHECK(ps.scores(3, 0) == doctest::Approx(1.5 * std::sqrt(2.0)));
    CHECK(ps.scores.col(1).cwiseAbs().maxCoeff() < 1e-12);

    const auto constant = principal_scores(CovariateSet::vectors(Eigen::MatrixXd::Ones(5, 3)));
    CHECK(constant.degenerate);
    CHECK(constant.scores.isZero());

    // Curves c_i(t) = b_i on [0, 2]: L2 score equals (b_i - mean b) * sqrt(2).
    Eigen::VectorXd b(3);
    b << 0.0, 1.0, 2.0;
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(9, 0.0, 2.0);
    const Eigen::MatrixXd curves = b * Eigen::RowVectorXd::Ones(9);
    const auto fs = principal_scores(CovariateSet::curves(curves, grid));
    CHECK(std::abs(fs.scores(2, 0)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(fs.scores(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}
