#include <fluorsep/operators.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/solver_single.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fluorsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nonnegative least-squares fit of `target` in an orthonormal basis.
WeightVector nonnegative_fit(const Eigen::MatrixXd &basis, const Eigen::VectorXd &target,
                             const QpSettings &qp) {
    const auto k = basis.cols();
    const Eigen::MatrixXd h = 2.0 * Eigen::MatrixXd::Identity(k, k);
    const Eigen::VectorXd c = -2.0 * basis.transpose() * target;
    return solve_qp(h, c, basis, Eigen::VectorXd::Zero(basis.rows()),
                    Eigen::VectorXd::Constant(basis.rows(), kInf), qp)
        .x;
}

} // namespace

void SingleTuning::validate() const {
    if (!(alpha >= 0 && std::isfinite(alpha)) || !(beta >= 0 && std::isfinite(beta)))
        throw std::invalid_argument("SingleTuning: alpha and beta must be finite and nonnegative");
    if (max_outer_iterations < 1)
        throw std::invalid_argument("SingleTuning: max_outer_iterations must be at least 1");
    if (!(objective_tol > 0))
        throw std::invalid_argument("SingleTuning: objective_tol must be positive");
    if (restarts < 0)
        throw std::invalid_argument("SingleTuning: restarts must be nonnegative");
}

Eigen::VectorXd outer_weights(const WeightVector &w_m, const WeightVector &w_x) {
    Eigen::VectorXd v(w_m.size() * w_x.size());
    for (Eigen::Index a = 0; a < w_m.size(); ++a)
        v.segment(a * w_x.size(), w_x.size()) = w_m[a] * w_x;
    return v;
}

SingleSolver::SingleSolver(BasisSet bases, SingleTuning tuning)
    : bases_{std::move(bases)}, tuning_{tuning}, ops_{bases_} {
    tuning_.validate();
}

double SingleSolver::objective(const LinearizedSystem &sys, const WeightVector &w_r,
                               const WeightVector &w_x, const WeightVector &w_m) const {
    if (w_r.size() != ops_.n_r || w_x.size() != ops_.n_x || w_m.size() != ops_.n_m)
        throw std::invalid_argument("SingleSolver::objective: weight lengths do not match the bases");
    Eigen::VectorXd x(ops_.n());
    x << w_r, outer_weights(w_m, w_x);
    return (sys.a() * x - sys.m()).squaredNorm() +
           tuning_.alpha * w_r.dot(ops_.reflectance_roughness * w_r) +
           tuning_.beta * (w_m.dot(ops_.emission_roughness * w_m) * w_x.squaredNorm() +
                           w_m.squaredNorm() * w_x.dot(ops_.excitation_roughness * w_x));
}

SingleEstimate SingleSolver::solve_from(const LinearizedSystem &sys, WeightVector w_x) const {
    const int n_r = ops_.n_r;
    const int n_x = ops_.n_x;
    const int n_m = ops_.n_m;
    const int n_w = ops_.n_w();
    const int d = ops_.d;

    Eigen::MatrixXd q = sys.gram();
    q.topLeftCorner(n_r, n_r) += tuning_.alpha * ops_.reflectance_roughness;
    // ||grad (B_m W B_x^T)||^2 + ||(B_m W B_x^T) grad^T||^2 for unmasked W,
    // i.e. R_m kron I + I kron R_x in the row-major layout.
    for (int a = 0; a < n_m; ++a)
        for (int a2 = 0; a2 < n_m; ++a2)
            q.block(n_r + a * n_x, n_r + a2 * n_x, n_x, n_x).diagonal().array() +=
                tuning_.beta * ops_.emission_roughness(a, a2);
    for (int a = 0; a < n_m; ++a)
        q.block(n_r + a * n_x, n_r + a * n_x, n_x, n_x) += tuning_.beta * ops_.excitation_roughness;

    // Minimizes over (w_r, v) with vec(W) = K v, subject to the reflectance box
    // and `basis` v >= 0.
    auto solve_block = [&](const Eigen::MatrixXd &k, const Eigen::MatrixXd &basis,
                           const Eigen::VectorXd &warm) {
        const auto nv = k.cols();
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ops_.n(), n_r + nv);
        s.topLeftCorner(n_r, n_r).setIdentity();
        s.bottomRightCorner(n_w, nv) = k;
        Eigen::MatrixXd h = 2.0 * s.transpose() * q * s;
        h = 0.5 * (h + h.transpose()).eval();
        const Eigen::VectorXd c = -2.0 * s.transpose() * sys.atm();
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * d, n_r + nv);
        a.topLeftCorner(d, n_r) = ops_.br;
        a.bottomRightCorner(d, nv) = basis;
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(2 * d);
        Eigen::VectorXd hi(2 * d);
        hi << Eigen::VectorXd::Ones(d), Eigen::VectorXd::Constant(d, kInf);
        return solve_qp(h, c, a, lo, hi, tuning_.qp, warm).x;
    };

    SingleEstimate est{
        .w_r = Eigen::VectorXd::Zero(n_r),
        .w_x = std::move(w_x),
        .w_m = Eigen::VectorXd::Zero(n_m),
        .reflectance = Spectrum::zeros(bases_.grid(), SpectralRole::reflectance),
        .excitation = Spectrum::zeros(bases_.grid(), SpectralRole::excitation),
        .emission = Spectrum::zeros(bases_.grid(), SpectralRole::emission),
        .donaldson = DonaldsonMatrix::zeros(bases_.grid()),
        .history = {},
    };
    double current = kInf;
    for (int outer = 1; outer <= tuning_.max_outer_iterations; ++outer) {
        // (w_r, w_m) with w_x fixed: vec(W) = (I kron w_x) w_m
        Eigen::MatrixXd kx = Eigen::MatrixXd::Zero(n_w, n_m);
        for (int a = 0; a < n_m; ++a)
            kx.block(a * n_x, a, n_x, 1) = est.w_x;
        Eigen::VectorXd warm(n_r + n_m);
        warm << est.w_r, est.w_m;
        Eigen::VectorXd y = solve_block(kx, ops_.bm, warm);
        double value = objective(sys, y.head(n_r), est.w_x, y.tail(n_m));
        if (value <= current) {
            est.w_r = y.head(n_r);
            est.w_m = y.tail(n_m);
            current = value;
        }

        // (w_r, w_x) with w_m fixed: vec(W) = (w_m kron I) w_x
        Eigen::MatrixXd km = Eigen::MatrixXd::Zero(n_w, n_x);
        for (int a = 0; a < n_m; ++a)
            km.block(a * n_x, 0, n_x, n_x).diagonal().setConstant(est.w_m[a]);
        warm.resize(n_r + n_x);
        warm << est.w_r, est.w_x;
        y = solve_block(km, ops_.bx, warm);
        value = objective(sys, y.head(n_r), y.tail(n_x), est.w_m);
        if (value <= current) {
            est.w_r = y.head(n_r);
            est.w_x = y.tail(n_x);
            current = value;
        }

        // The objective is invariant under (w_x * s, w_m / s); keep the
        // factors balanced so neither QP becomes badly scaled.
        const double nx = est.w_x.norm();
        const double nm = est.w_m.norm();
        if (nx > 0 && nm > 0) {
            const double s = std::sqrt(nm / nx);
            est.w_x *= s;
            est.w_m /= s;
        }

        const double previous = est.history.empty() ? kInf : est.history.back();
        est.history.push_back(current);
        est.outer_iterations = outer;
        if (current == 0.0 ||
            (std::isfinite(previous) && previous - current <= tuning_.objective_tol * previous)) {
            est.converged = true;
            break;
        }
    }
    est.objective = current;
    return est;
}

SingleEstimate SingleSolver::finish(const LinearizedSystem &sys, SingleEstimate est) const {
    Eigen::VectorXd x(ops_.n());
    x << est.w_r, outer_weights(est.w_m, est.w_x);
    const double fluorescence = (sys.a_fluorescence() * x.tail(ops_.n_w())).norm();
    if (fluorescence <= 1e-8 * sys.m().norm()) {
        est.degenerate = true;
        est.w_x.setZero();
        est.w_m.setZero();
        x.tail(ops_.n_w()).setZero();
        est.objective = objective(sys, est.w_r, est.w_x, est.w_m);
    }
    est.residual_norm = (sys.a() * x - sys.m()).norm();
    est.reflectance = Spectrum{bases_.grid(), project_box(ops_.br * est.w_r, 0.0, 1.0),
                               SpectralRole::reflectance};
    if (est.degenerate)
        return est;

    est.excitation = Spectrum{bases_.grid(), (ops_.bx * est.w_x).cwiseMax(0.0), SpectralRole::excitation};
    est.emission = Spectrum{bases_.grid(), (ops_.bm * est.w_m).cwiseMax(0.0), SpectralRole::emission};
    const Fluorophore f{est.excitation, est.emission};
    est.donaldson = donaldson_from_fluorophores(std::span<const Fluorophore>{&f, 1});
    return normalize_scaling(est);
}

SingleEstimate SingleSolver::solve(const MeasurementGrid &meas) const {
    require_compatible(meas, bases_, "estimate_single");
    const LinearizedSystem sys{meas, ops_};
    const auto &bx = ops_.bx;

    SingleEstimate best = solve_from(sys, nonnegative_fit(bx, Eigen::VectorXd::Ones(ops_.d), tuning_.qp));
    Rng rng{stream_seed(tuning_.seed, "single/restart")};
    const Eigen::VectorXd lambda = bases_.grid().wavelengths();
    std::uniform_real_distribution<double> centre{lambda[0], lambda[lambda.size() - 1]};
    std::uniform_real_distribution<double> width{20.0, 80.0};
    for (int r = 0; r < tuning_.restarts; ++r) {
        const double c = centre(rng);
        const double s = width(rng);
        const Eigen::VectorXd guess = (-0.5 * ((lambda.array() - c) / s).square()).exp().matrix();
        SingleEstimate trial = solve_from(sys, nonnegative_fit(bx, guess, tuning_.qp));
        if (trial.objective < best.objective)
            best = std::move(trial);
    }
    return finish(sys, std::move(best));
}

SingleEstimate estimate_single(const MeasurementGrid &m, const BasisSet &bases,
                               const SingleTuning &tuning) {
    return SingleSolver{bases, tuning}.solve(m);
}

SingleEstimate normalize_scaling(const SingleEstimate &estimate) {
    const double peak = estimate.emission.values().maxCoeff();
    if (!(peak > 0))
        throw std::invalid_argument("normalize_scaling: emission is identically zero");
    SingleEstimate out = estimate;
    const auto &grid = estimate.emission.grid();
    out.emission = Spectrum{grid, estimate.emission.values() / peak, SpectralRole::emission};
    out.excitation = Spectrum{grid, estimate.excitation.values() * peak, SpectralRole::excitation};
    out.w_m = estimate.w_m / peak;
    out.w_x = estimate.w_x * peak;
    out.normalization_factor = estimate.normalization_factor * peak;
    return out;
}

} // namespace fluorsep
