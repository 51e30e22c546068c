#include "support.hpp"

#include <fluorsep/operators.hpp>

#include <doctest.h>

#include <algorithm>

using namespace fluorsep;
using namespace fluorsep::test;

TEST_CASE("difference operator") {
    Eigen::MatrixXd d2(1, 2);
    d2 << 1, -1;
    CHECK(difference_operator(2) == d2);
    CHECK((difference_operator(7) * Eigen::VectorXd::Constant(7, 3.5)).isZero());
    CHECK(difference_operator(4) * Eigen::Vector4d(0, 1, 4, 9) == Eigen::Vector3d(-1, -3, -5));
    CHECK_THROWS_AS(difference_operator(1), std::invalid_argument);
}

TEST_CASE("project_box") {
    CHECK(project_box(Eigen::Vector2d(0.2, 0.7), 0, 1) == Eigen::Vector2d(0.2, 0.7));
    CHECK(project_box(Eigen::Vector2d(-1, 2), 0, 1) == Eigen::Vector2d(0, 1));
    Rng rng{31};
    const Eigen::VectorXd x = gaussian_matrix(rng, 50, 1);
    const auto y = project_box(x, -0.3, 0.4);
    for (int k = 0; k < 50; ++k)
        CHECK(y[k] == std::min(0.4, std::max(-0.3, x[k])));
    CHECK_THROWS_AS(project_box(x, 1, 0), std::invalid_argument);
}

TEST_CASE("prox_nuclear on analytic cases") {
    Eigen::MatrixXd w = Eigen::Vector2d(3, 1).asDiagonal();
    Eigen::MatrixXd expect = Eigen::Vector2d(2, 0).asDiagonal();
    CHECK((prox_nuclear(w, 1.0) - expect).cwiseAbs().maxCoeff() < 1e-14);
    Rng rng{32};
    const Eigen::MatrixXd r = gaussian_matrix(rng, 4, 3);
    CHECK(prox_nuclear(r, 0.0) == r);
    CHECK_THROWS_AS(prox_nuclear(r, -1.0), std::invalid_argument);
}

TEST_CASE("prox_nuclear singular values match an SVD oracle") {
    Rng rng{33};
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd w = gaussian_matrix(rng, 5, 4);
        const double t = uniform_vector(rng, 1, 0.0, 2.0)[0];
        const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues();
        const Eigen::VectorXd expect = (s.array() - t).cwiseMax(0.0).matrix();
        const Eigen::MatrixXd x = prox_nuclear(w, t);
        const Eigen::VectorXd got = Eigen::JacobiSVD<Eigen::MatrixXd>(x).singularValues();
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(nuclear_norm(x) <= nuclear_norm(w) + 1e-12);
    }
}

TEST_CASE("prox_nuclear minimizes the proximal objective on diagonal matrices") {
    // For diagonal w the objective separates per entry:
    // 1/2 (x - w)^2 + t |x| over a 1e-3 grid.
    Rng rng{34};
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Vector3d diag = uniform_vector(rng, 3, -2.0, 2.0);
        const double t = uniform_vector(rng, 1, 0.0, 1.0)[0];
        const Eigen::MatrixXd x = prox_nuclear(Eigen::MatrixXd(diag.asDiagonal()), t);
        for (int k = 0; k < 3; ++k) {
            double best = 0.0;
            double best_val = std::numeric_limits<double>::infinity();
            for (int n = -3000; n <= 3000; ++n) {
                const double v = n * 1e-3;
                const double f = 0.5 * (v - diag[k]) * (v - diag[k]) + t * std::abs(v);
                if (f < best_val) {
                    best_val = f;
                    best = v;
                }
            }
            CHECK(std::abs(x(k, k) - best) <= 1e-3);
        }
        CHECK((x - Eigen::MatrixXd(x.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("best_rank_approximation") {
    Rng rng{35};
    const Eigen::MatrixXd u = gaussian_matrix(rng, 6, 2);
    const Eigen::MatrixXd v = gaussian_matrix(rng, 5, 2);
    const Eigen::MatrixXd w = u * v.transpose();
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues();
    CHECK((best_rank_approximation(w, 2) - w).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((best_rank_approximation(w, 1) - w).norm() == doctest::Approx(s[1]).epsilon(1e-10));
    CHECK_THROWS_AS(best_rank_approximation(w, 0), std::invalid_argument);
    CHECK_THROWS_AS(best_rank_approximation(w, 6), std::invalid_argument);
}

TEST_CASE("nuclear norm is the sum of singular values") {
    Eigen::MatrixXd w = Eigen::Vector3d(3, -2, 0.5).asDiagonal();
    CHECK(nuclear_norm(w) == doctest::Approx(5.5));
}
