#include "support.hpp"

#include <fluorsep/bootstrap.hpp>
#include <fluorsep/fixtures.hpp>
#include <fluorsep/metrics.hpp>
#include <fluorsep/sweeps.hpp>

#include <doctest.h>

#include <sstream>

using namespace fluorsep;
using namespace fluorsep::test;

TEST_CASE("rmse examples") {
    const Eigen::Vector2d a(0.3, 0.9);
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)) == 1.0);
    CHECK(rmse(2.0 * a, a, true) < 1e-15);
    CHECK(rmse(Eigen::Vector2d(0, 0), a, true) == doctest::Approx(std::sqrt((1.0 / 9 + 1.0) / 2)));
    CHECK_THROWS_AS(rmse(a, Eigen::Vector2d::Zero(), true), std::invalid_argument);
    CHECK_THROWS_AS(rmse(a, Eigen::Vector3d::Ones()), std::invalid_argument);
}

TEST_CASE("rmse matches the formula and behaves like a metric") {
    Rng rng{81};
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::MatrixXd a = gaussian_matrix(rng, 4, 3);
        const Eigen::MatrixXd b = gaussian_matrix(rng, 4, 3);
        const Eigen::MatrixXd c = gaussian_matrix(rng, 4, 3);
        double acc = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int k = 0; k < 3; ++k)
                acc += (a(r, k) - b(r, k)) * (a(r, k) - b(r, k));
        CHECK(rmse(a, b) == doctest::Approx(std::sqrt(acc / 12.0)).epsilon(1e-14));
        CHECK(rmse(a, b) == rmse(b, a));
        CHECK(rmse(a, b) >= 0.0);
        CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-15);
    }
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(s.count == 4);
    const std::vector<double> abs_v{0.1, 0.3};
    const std::vector<double> norm_v{0.2, 0.4};
    const auto report = make_report(Quantity::emission, abs_v, norm_v);
    CHECK(report.absolute.mean == doctest::Approx(0.2));
    CHECK(report.normalized.mean == doctest::Approx(0.3));
    CHECK(to_string(Quantity::donaldson) == "donaldson");
}

TEST_CASE("percentile interpolates linearly") {
    CHECK(percentile({3, 1, 2}, 50) == 2.0);
    CHECK(percentile({0, 10}, 25) == 2.5);
    CHECK(percentile({5}, 97.5) == 5.0);
    CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1}, 101), std::invalid_argument);
}

namespace {

// Reflectance read off the diagonal of a bispectral measurement.
Eigen::VectorXd diagonal_estimator(const MeasurementGrid &m) {
    return m.values().diagonal();
}

} // namespace

TEST_CASE("bootstrap on identical samples has zero width") {
    Rng rng{82};
    const auto grid = small_grid(10);
    const auto sys = std::make_shared<const ImagingSystem>(make_bispectral_system(grid));
    const MeasurementGrid m{Eigen::MatrixXd(uniform_vector(rng, 10).asDiagonal()), sys,
                            GainMatrix::uniform(10, 10)};
    const std::vector<MeasurementGrid> samples(5, m);
    const auto ci = bootstrap_ci(samples, diagonal_estimator);
    CHECK(ci.replicates == kDefaultReplicates);
    CHECK(kDefaultReplicates == 100);
    CHECK((ci.upper.values() - ci.lower.values()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(bootstrap_ci({}, diagonal_estimator), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_ci(samples, diagonal_estimator, 1), std::invalid_argument);
}

TEST_CASE("bootstrap is reproducible and covers the truth") {
    Rng rng{83};
    const int d = 100;
    const auto grid = WavelengthGrid::spanning(400.0, 796.0, d);
    const auto sys = std::make_shared<const ImagingSystem>(make_bispectral_system(grid));
    const Eigen::VectorXd r = uniform_vector(rng, d, 0.2, 0.8);
    const auto clean = simulate(SurfacePatch::reflective(Spectrum{grid, r}), sys, GainMatrix::uniform(d, d));
    std::vector<MeasurementGrid> samples;
    for (std::uint64_t k = 0; k < 40; ++k)
        samples.push_back(add_noise(clean, 20.0, k));
    const auto a = bootstrap_ci(samples, diagonal_estimator, 200, 7);
    const auto b = bootstrap_ci(samples, diagonal_estimator, 200, 7);
    CHECK(a.lower.values() == b.lower.values());
    CHECK(a.upper.values() == b.upper.values());
    int covered = 0;
    for (int k = 0; k < d; ++k) {
        CHECK(a.lower[k] <= a.upper[k]);
        covered += (a.lower[k] <= r[k] && r[k] <= a.upper[k]) ? 1 : 0;
    }
    CHECK(covered >= 90);
}

TEST_CASE("sweep CSV format") {
    SweepResult r;
    r.name = "noise";
    r.points = {{"0", "", 0.5, 0.01}, {"20", "", 0.25, 0.002}};
    CHECK(format_sweep_csv(r) == "axis1,axis2,mean_rmse,std_err\n0,,0.5,0.01\n20,,0.25,0.002\n");
}

TEST_CASE("sweep plans") {
    const auto noise = sweep_plan("noise", true);
    CHECK(noise.options.grid.size() == 32);
    CHECK(noise.options.patch_count == 4);
    CHECK(noise.axis1.size() == 3);
    CHECK(noise.options.alpha == 0.01);
    const auto bases = sweep_plan("bases", false);
    CHECK(bases.options.grid == WavelengthGrid::standard());
    CHECK(bases.options.alpha == 0.001);
    CHECK_THROWS_AS(sweep_plan("colour", false), std::invalid_argument);
}

TEST_CASE("smoke bases sweep is weakly decreasing on average") {
    const auto plan = sweep_plan("bases", true);
    const auto fixtures = generate_fixture_set(1, plan.options.grid);
    const auto r = run_sweep(fixtures, plan);
    REQUIRE(r.points.size() == 4);
    // points are (n_x, n_m) in row-major order over {3, 6} x {3, 6}
    std::map<std::pair<std::string, std::string>, double> at;
    for (const auto &p : r.points)
        at[{p.axis1, p.axis2}] = p.mean_rmse;
    const double dx = 0.5 * ((at[{"6", "3"}] - at[{"3", "3"}]) + (at[{"6", "6"}] - at[{"3", "6"}]));
    const double dm = 0.5 * ((at[{"3", "6"}] - at[{"3", "3"}]) + (at[{"6", "6"}] - at[{"6", "3"}]));
    CHECK(dx <= 0.002);
    CHECK(dm <= 0.002);
}

TEST_CASE("sweep ranges are validated") {
    const auto fixtures = generate_fixture_set(1, WavelengthGrid::spanning(380.0, 1000.0, 16));
    SweepOptions o;
    o.grid = fixtures.grid();
    o.patch_count = 2;
    CHECK_THROWS_AS(sweep_channels(fixtures, {0}, {4}, o), std::invalid_argument);
    CHECK_THROWS_AS(sweep_bases(fixtures, {20}, {4}, o), std::invalid_argument);
    CHECK_THROWS_AS(sweep_noise(fixtures, {10.0}, 0, o), std::invalid_argument);
    CHECK_THROWS_AS(sweep_convergence(fixtures, {0}, o), std::invalid_argument);
    o.patch_count = 99;
    CHECK_THROWS_AS(sweep_bases(fixtures, {3}, {3}, o), std::invalid_argument);
}

TEST_CASE("sweep results do not depend on the worker count") {
    const auto fixtures = generate_fixture_set(1, WavelengthGrid::spanning(380.0, 1000.0, 16));
    SweepOptions o;
    o.grid = fixtures.grid();
    o.patch_count = 3;
    o.n_x = o.n_m = 4;
    o.max_iterations = 50;
    setenv("FLUORSEP_THREADS", "1", 1);
    const auto one = format_sweep_csv(sweep_noise(fixtures, {10.0, 30.0}, 2, o));
    setenv("FLUORSEP_THREADS", "3", 1);
    const auto three = format_sweep_csv(sweep_noise(fixtures, {10.0, 30.0}, 2, o));
    unsetenv("FLUORSEP_THREADS");
    CHECK(one == three);
}
