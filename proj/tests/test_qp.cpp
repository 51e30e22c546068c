#include "support.hpp"

#include <fluorsep/qp.hpp>

#include <doctest.h>

using namespace fluorsep;
using namespace fluorsep::test;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Projected gradient with step 1/L run to a fixed point.
Eigen::VectorXd projected_gradient(const Eigen::MatrixXd &h, const Eigen::VectorXd &c,
                                   const Eigen::VectorXd &lo, const Eigen::VectorXd &hi) {
    const double l = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(c.size()).cwiseMax(lo).cwiseMin(hi);
    for (int it = 0; it < 200000; ++it) {
        const Eigen::VectorXd next = (x - (h * x + c) / l).cwiseMax(lo).cwiseMin(hi);
        const double step = (next - x).cwiseAbs().maxCoeff();
        x = next;
        if (step < 1e-15)
            break;
    }
    return x;
}

} // namespace

TEST_CASE("identity Hessian with x >= 1") {
    const int n = 4;
    const auto r = solve_qp(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n),
                            Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Ones(n),
                            Eigen::VectorXd::Constant(n, inf));
    CHECK(r.converged);
    CHECK((r.x - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("unconstrained solution is -H^-1 c") {
    Rng rng{41};
    const Eigen::MatrixXd b = gaussian_matrix(rng, 5, 5);
    const Eigen::MatrixXd h = b * b.transpose() + Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd c = gaussian_matrix(rng, 5, 1);
    const Eigen::VectorXd expect = -h.llt().solve(c);
    const auto r = solve_qp(h, c, Eigen::MatrixXd(0, 5), Eigen::VectorXd(0), Eigen::VectorXd(0));
    CHECK((r.x - expect).cwiseAbs().maxCoeff() < 1e-10);
    // loose bounds behave the same
    const auto boxed = solve_qp(h, c, Eigen::MatrixXd::Identity(5, 5), Eigen::VectorXd::Constant(5, -1e6),
                                Eigen::VectorXd::Constant(5, 1e6));
    CHECK((boxed.x - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("random box QPs match a projected-gradient oracle") {
    Rng rng{42};
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd b = gaussian_matrix(rng, 6, 6);
        const Eigen::MatrixXd h = b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(6, 6);
        const Eigen::VectorXd c = 3.0 * gaussian_matrix(rng, 6, 1);
        const Eigen::VectorXd lo = uniform_vector(rng, 6, -1.0, 0.0);
        const Eigen::VectorXd hi = uniform_vector(rng, 6, 0.1, 1.0);
        const auto r = solve_qp(h, c, Eigen::MatrixXd::Identity(6, 6), lo, hi);
        const auto oracle = projected_gradient(h, c, lo, hi);
        CHECK(r.converged);
        CHECK((r.x - oracle).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(r.objective == doctest::Approx(0.5 * oracle.dot(h * oracle) + c.dot(oracle)).epsilon(1e-9));
    }
}

TEST_CASE("general inequality and equality rows") {
    // min (x0-1)^2 + (x1-2)^2  s.t.  x0 + x1 = 1, x0 - x1 <= 0
    Eigen::MatrixXd h = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::Vector2d c(-2, -4);
    Eigen::MatrixXd a(2, 2);
    a << 1, 1, 1, -1;
    const auto r = solve_qp(h, c, a, Eigen::Vector2d(1, -inf), Eigen::Vector2d(1, 0));
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("semidefinite Hessian with active bounds") {
    // linear objective on a box: minimizer at a corner
    const auto r = solve_qp(Eigen::MatrixXd::Zero(3, 3), Eigen::Vector3d(1, -1, 2),
                            Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(-1, -1, -1),
                            Eigen::Vector3d(1, 1, 1));
    CHECK((r.x - Eigen::Vector3d(-1, 1, -1)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("errors") {
    Eigen::MatrixXd indefinite = Eigen::Vector2d(1, -1).asDiagonal();
    CHECK_THROWS_AS(solve_qp(indefinite, Eigen::Vector2d::Zero(), Eigen::MatrixXd::Identity(2, 2),
                             Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)),
                    std::invalid_argument);
    // x0 >= 1 and x0 <= 0
    Eigen::MatrixXd a(2, 1);
    a << 1, 1;
    CHECK_THROWS_AS(solve_qp(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), a,
                             Eigen::Vector2d(1, -inf), Eigen::Vector2d(inf, 0)),
                    QpInfeasible);
    CHECK_THROWS_AS(solve_qp(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(3),
                             Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(),
                             Eigen::Vector2d::Ones()),
                    std::invalid_argument);
}

TEST_CASE("warm start reaches the same answer") {
    Rng rng{43};
    const Eigen::MatrixXd b = gaussian_matrix(rng, 4, 4);
    const Eigen::MatrixXd h = b * b.transpose() + Eigen::MatrixXd::Identity(4, 4);
    const Eigen::VectorXd c = gaussian_matrix(rng, 4, 1);
    const auto cold = solve_qp(h, c, Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4),
                               Eigen::VectorXd::Ones(4));
    const auto warm = solve_qp(h, c, Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4),
                               Eigen::VectorXd::Ones(4), {}, cold.x, cold.y);
    CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(warm.iterations <= cold.iterations);
}
