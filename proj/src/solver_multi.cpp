#include <fluorsep/operators.hpp>
#include <fluorsep/solver_multi.hpp>

#include <cmath>
#include <stdexcept>

namespace fluorsep {

void MultiTuning::validate() const {
    auto check = [](bool ok, const char *what) {
        if (!ok)
            throw std::invalid_argument(std::string{"MultiTuning: "} + what);
    };
    check(alpha >= 0 && std::isfinite(alpha), "alpha must be finite and nonnegative");
    check(beta >= 0 && std::isfinite(beta), "beta must be finite and nonnegative");
    check(eta >= 0 && std::isfinite(eta), "eta must be finite and nonnegative");
    check(rho > 0 && std::isfinite(rho), "rho must be positive");
    check(max_iterations >= 1, "max_iterations must be at least 1");
    check(primal_tol > 0 && dual_tol > 0, "tolerances must be positive");
}

Spectrum reflectance_from_weights(const LinearBasis &basis, const WeightVector &w_r) {
    return {basis.grid(), project_box(basis.functions() * w_r, 0.0, 1.0),
            SpectralRole::reflectance};
}

DonaldsonMatrix donaldson_from_weights(const BasisSet &bases, const WeightMatrix &w) {
    const auto &bm = bases.emission.functions();
    const auto &bx = bases.excitation.functions();
    if (w.rows() != bm.cols() || w.cols() != bx.cols())
        throw std::invalid_argument("donaldson_from_weights: W is " + std::to_string(w.rows()) +
                                    "x" + std::to_string(w.cols()) + ", bases need " +
                                    std::to_string(bm.cols()) + "x" + std::to_string(bx.cols()));
    Eigen::MatrixXd d = (bm * w * bx.transpose()).cwiseMax(0.0);
    d.triangularView<Eigen::Upper>().setZero();
    return {bases.grid(), std::move(d)};
}

MultiSolver::MultiSolver(BasisSet bases, MultiTuning tuning)
    : bases_{std::move(bases)}, tuning_{tuning}, ops_{bases_} {
    tuning_.validate();
}

double MultiSolver::objective(const LinearizedSystem &sys, const WeightVector &w_r,
                              const WeightMatrix &w) const {
    Eigen::VectorXd x(ops_.n());
    x << w_r, flatten(w);
    const Eigen::VectorXd fw = x.tail(ops_.n_w());
    return sys.data_term(x) + tuning_.alpha * w_r.dot(ops_.reflectance_roughness * w_r) +
           tuning_.beta * fw.dot(ops_.donaldson_roughness * fw) + tuning_.eta * nuclear_norm(w);
}

MultiEstimate MultiSolver::solve(const MeasurementGrid &meas, const MultiObserver &observer) const {
    require_compatible(meas, bases_, "estimate_multi");
    const LinearizedSystem sys{meas, ops_};
    const int n_r = ops_.n_r;
    const int n_w = ops_.n_w();
    const int n = ops_.n();
    const auto &br = ops_.br;

    // Smooth quadratic: x^T Q x - 2 x^T A^T m + ||m||^2
    Eigen::MatrixXd q = sys.gram();
    q.topLeftCorner(n_r, n_r) += tuning_.alpha * ops_.reflectance_roughness;
    q.bottomRightCorner(n_w, n_w) += tuning_.beta * ops_.donaldson_roughness;

    // K^T K for K x = (B_r w_r, D(W), W); B_r has orthonormal columns.
    Eigen::MatrixXd ktk = Eigen::MatrixXd::Zero(n, n);
    ktk.topLeftCorner(n_r, n_r).setIdentity();
    ktk.bottomRightCorner(n_w, n_w) = ops_.donaldson_gram;
    ktk.bottomRightCorner(n_w, n_w).diagonal().array() += 1.0;

    double rho = tuning_.rho;
    Eigen::LLT<Eigen::MatrixXd> factor;
    auto refactor = [&] {
        factor.compute(2.0 * q + rho * ktk);
        if (factor.info() != Eigen::Success)
            throw std::runtime_error("estimate_multi: x-update system is not positive definite");
    };
    refactor();

    auto full_objective = [&](const Eigen::VectorXd &x, const Eigen::MatrixXd &w) {
        return std::max(0.0, x.dot(q * x) - 2.0 * x.dot(sys.atm()) + sys.mm()) +
               tuning_.eta * nuclear_norm(w);
    };

    // Reflectance-only least squares, clamped into the box.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    {
        const Eigen::MatrixXd g_rr = sys.gram().topLeftCorner(n_r, n_r);
        const Eigen::VectorXd w_ls = g_rr.completeOrthogonalDecomposition().solve(sys.atm().head(n_r));
        x.head(n_r) = br.transpose() * project_box(br * w_ls, 0.0, 1.0);
    }

    Eigen::VectorXd z1 = project_box(br * x.head(n_r), 0.0, 1.0);
    Eigen::MatrixXd z2 = Eigen::MatrixXd::Zero(ops_.d, ops_.d);
    Eigen::MatrixXd z3 = Eigen::MatrixXd::Zero(ops_.n_m, ops_.n_x);
    Eigen::VectorXd u1 = Eigen::VectorXd::Zero(ops_.d);
    Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(ops_.d, ops_.d);
    Eigen::MatrixXd u3 = Eigen::MatrixXd::Zero(ops_.n_m, ops_.n_x);
    const Eigen::VectorXd b0 = 2.0 * sys.atm();

    MultiEstimate est{
        .w_r = x.head(n_r),
        .w = Eigen::MatrixXd::Zero(ops_.n_m, ops_.n_x),
        .reflectance = Spectrum::zeros(bases_.grid(), SpectralRole::reflectance),
        .donaldson = DonaldsonMatrix::zeros(bases_.grid()),
        .history = {},
    };
    est.history.reserve(static_cast<std::size_t>(tuning_.max_iterations));

    Eigen::VectorXd rhs(n);
    Eigen::MatrixXd w(ops_.n_m, ops_.n_x);
    for (int it = 1; it <= tuning_.max_iterations; ++it) {
        rhs.head(n_r) = br.transpose() * (z1 - u1);
        rhs.tail(n_w) = flatten(ops_.donaldson_adjoint(z2 - u2) + (z3 - u3));
        x = factor.solve(b0 + rho * rhs);

        w = unflatten(x.tail(n_w), ops_.n_m, ops_.n_x);
        const Eigen::VectorXd r = br * x.head(n_r);
        const Eigen::MatrixXd dm = ops_.donaldson(w);

        const Eigen::VectorXd z1_old = z1;
        const Eigen::MatrixXd z2_old = z2;
        const Eigen::MatrixXd z3_old = z3;
        z1 = project_box(r + u1, 0.0, 1.0);
        z2 = (dm + u2).cwiseMax(0.0);
        z2.triangularView<Eigen::Upper>().setZero();
        z3 = prox_nuclear(w + u3, tuning_.eta / rho);

        u1 += r - z1;
        u2 += dm - z2;
        u3 += w - z3;

        const double primal = std::sqrt((r - z1).squaredNorm() + (dm - z2).squaredNorm() +
                                        (w - z3).squaredNorm());
        const double kx = std::sqrt(r.squaredNorm() + dm.squaredNorm() + w.squaredNorm());
        const double zn = std::sqrt(z1.squaredNorm() + z2.squaredNorm() + z3.squaredNorm());
        Eigen::VectorXd kt_dz(n);
        kt_dz.head(n_r) = br.transpose() * (z1 - z1_old);
        kt_dz.tail(n_w) = flatten(ops_.donaldson_adjoint(z2 - z2_old) + (z3 - z3_old));
        const double dual = rho * kt_dz.norm();
        Eigen::VectorXd kt_u(n);
        kt_u.head(n_r) = br.transpose() * u1;
        kt_u.tail(n_w) = flatten(ops_.donaldson_adjoint(u2) + u3);
        const double dual_scale = rho * kt_u.norm();

        est.history.push_back({full_objective(x, w), primal, dual, rho});
        est.iterations_run = it;
        if (observer)
            observer(it, x.head(n_r), w);

        const double primal_rel = primal / std::max(kx, zn);
        const double dual_rel = dual / dual_scale;
        if (primal <= tuning_.primal_tol * std::max(kx, zn) &&
            dual <= tuning_.dual_tol * dual_scale) {
            est.converged = true;
            break;
        }
        if (tuning_.adaptive_rho && it % 10 == 0 && std::isfinite(primal_rel) &&
            std::isfinite(dual_rel)) {
            double scale = 1.0;
            if (primal_rel > 10.0 * dual_rel)
                scale = 2.0;
            else if (dual_rel > 10.0 * primal_rel)
                scale = 0.5;
            if (scale != 1.0) {
                rho *= scale;
                u1 /= scale;
                u2 /= scale;
                u3 /= scale;
                refactor();
            }
        }
    }

    est.w_r = x.head(n_r);
    est.w = w;
    est.reflectance = reflectance_from_weights(bases_.reflectance, est.w_r);
    est.donaldson = donaldson_from_weights(bases_, est.w);
    est.residual_norm = (sys.m() - sys.a() * x).norm();
    est.objective = est.history.empty() ? full_objective(x, w) : est.history.back().objective;
    return est;
}

MultiEstimate estimate_multi(const MeasurementGrid &m, const BasisSet &bases,
                             const MultiTuning &tuning) {
    return MultiSolver{bases, tuning}.solve(m);
}

MultiEstimate truncate_rank(const MultiEstimate &estimate, const BasisSet &bases, int n) {
    MultiEstimate out = estimate;
    out.w = best_rank_approximation(estimate.w, n);
    out.donaldson = donaldson_from_weights(bases, out.w);
    return out;
}

} // namespace fluorsep
