#include <fluorsep/qp.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fluorsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

void check_problem(const Eigen::MatrixXd &h, const Eigen::VectorXd &c, const Eigen::MatrixXd &a,
                   const Eigen::VectorXd &lo, const Eigen::VectorXd &hi) {
    const auto n = h.rows();
    if (h.cols() != n || c.size() != n)
        throw std::invalid_argument("solve_qp: H is " + std::to_string(h.rows()) + "x" +
                                    std::to_string(h.cols()) + ", c has " +
                                    std::to_string(c.size()) + " entries");
    if (a.cols() != n || lo.size() != a.rows() || hi.size() != a.rows())
        throw std::invalid_argument("solve_qp: A is " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " with bounds of length " +
                                    std::to_string(lo.size()) + "/" + std::to_string(hi.size()) +
                                    " for " + std::to_string(n) + " variables");
    if (!h.allFinite() || !c.allFinite() || !a.allFinite())
        throw std::invalid_argument("solve_qp: non-finite problem data");
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
        if (std::isnan(lo[k]) || std::isnan(hi[k]))
            throw std::invalid_argument("solve_qp: NaN bound");
        if (lo[k] > hi[k])
            throw QpInfeasible("solve_qp: bound " + std::to_string(k) + " has lo > hi");
    }
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("solve_qp: Hessian is not symmetric");
    if (n > 0) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
            throw std::invalid_argument("solve_qp: Hessian is not positive semidefinite (min "
                                        "eigenvalue " +
                                        std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
}

double objective(const Eigen::MatrixXd &h, const Eigen::VectorXd &c, const Eigen::VectorXd &x) {
    return 0.5 * x.dot(h * x) + c.dot(x);
}

// Solves the equality-constrained problem on the guessed active set.
bool polish(const Eigen::MatrixXd &h, const Eigen::VectorXd &c, const Eigen::MatrixXd &a,
            const Eigen::VectorXd &lo, const Eigen::VectorXd &hi, const Eigen::VectorXd &z,
            const Eigen::VectorXd &y, double tol, QpResult &out) {
    const auto n = h.rows();
    const auto m = a.rows();
    std::vector<Eigen::Index> rows;
    std::vector<double> bound;
    std::vector<int> side; // -1 lower, +1 upper, 0 equality
    for (Eigen::Index k = 0; k < m; ++k) {
        if (lo[k] == hi[k]) {
            rows.push_back(k);
            bound.push_back(lo[k]);
            side.push_back(0);
        } else if (z[k] - lo[k] < -y[k]) {
            rows.push_back(k);
            bound.push_back(lo[k]);
            side.push_back(-1);
        } else if (hi[k] - z[k] < y[k]) {
            rows.push_back(k);
            bound.push_back(hi[k]);
            side.push_back(1);
        }
    }
    const auto na = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
    Eigen::VectorXd rhs(n + na);
    kkt.topLeftCorner(n, n) = h;
    rhs.head(n) = -c;
    for (Eigen::Index r = 0; r < na; ++r) {
        kkt.block(n + r, 0, 1, n) = a.row(rows[static_cast<std::size_t>(r)]);
        kkt.block(0, n + r, n, 1) = a.row(rows[static_cast<std::size_t>(r)]).transpose();
        rhs[n + r] = bound[static_cast<std::size_t>(r)];
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int refine = 0; refine < 3; ++refine)
        sol += lu.solve(rhs - kkt * sol);
    if (!sol.allFinite() || (kkt * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, inf_norm(rhs)))
        return false;

    const Eigen::VectorXd x = sol.head(n);
    Eigen::VectorXd yy = Eigen::VectorXd::Zero(m);
    for (Eigen::Index r = 0; r < na; ++r) {
        const double mult = sol[n + r];
        const int s = side[static_cast<std::size_t>(r)];
        if ((s < 0 && mult > tol) || (s > 0 && mult < -tol))
            return false;
        yy[rows[static_cast<std::size_t>(r)]] = mult;
    }
    const Eigen::VectorXd ax = a * x;
    const double slack = tol * std::max(1.0, inf_norm(ax));
    for (Eigen::Index k = 0; k < m; ++k)
        if (ax[k] < lo[k] - slack || ax[k] > hi[k] + slack)
            return false;
    out.x = x;
    out.y = yy;
    out.polished = true;
    return true;
}

} // namespace

QpResult solve_qp(const Eigen::MatrixXd &h, const Eigen::VectorXd &c, const Eigen::MatrixXd &a,
                  const Eigen::VectorXd &lo, const Eigen::VectorXd &hi, const QpSettings &settings,
                  const Eigen::VectorXd &warm_x, const Eigen::VectorXd &warm_y) {
    check_problem(h, c, a, lo, hi);
    if (settings.max_iterations < 1 || settings.rho <= 0 || settings.sigma <= 0 ||
        settings.relaxation <= 0 || settings.relaxation >= 2)
        throw std::invalid_argument("solve_qp: invalid settings");
    const auto n = h.rows();
    const auto m = a.rows();

    QpResult out;
    out.x = warm_x.size() == n ? warm_x : Eigen::VectorXd::Zero(n);
    out.y = warm_y.size() == m ? warm_y : Eigen::VectorXd::Zero(m);
    if (m == 0) {
        out.x = h.ldlt().solve(-c);
        if (!out.x.allFinite() || (h * out.x + c).lpNorm<Eigen::Infinity>() > 1e-8 * std::max(1.0, inf_norm(c)))
            throw std::invalid_argument("solve_qp: unconstrained problem is unbounded below");
        out.objective = objective(h, c, out.x);
        out.converged = true;
        return out;
    }

    Eigen::VectorXd x = out.x;
    Eigen::VectorXd y = out.y;
    Eigen::VectorXd z = (a * x).cwiseMax(lo).cwiseMin(hi);

    double rho = settings.rho;
    Eigen::VectorXd rho_vec(m);
    Eigen::LLT<Eigen::MatrixXd> factor;
    auto refactor = [&] {
        for (Eigen::Index k = 0; k < m; ++k)
            rho_vec[k] = lo[k] == hi[k] ? 1e3 * rho : rho;
        Eigen::MatrixXd kkt = h;
        kkt.diagonal().array() += settings.sigma;
        kkt.noalias() += a.transpose() * rho_vec.asDiagonal() * a;
        factor.compute(kkt);
        if (factor.info() != Eigen::Success)
            throw std::runtime_error("solve_qp: reduced KKT factorization failed");
    };
    refactor();

    const double alpha = settings.relaxation;
    const double eps_inf = 1e-9;
    Eigen::VectorXd x_tilde(n), z_tilde(m), z_next(m), y_prev(m);
    for (int it = 1; it <= settings.max_iterations; ++it) {
        x_tilde = factor.solve(settings.sigma * x - c + a.transpose() * (rho_vec.cwiseProduct(z) - y));
        z_tilde = a * x_tilde;
        x = alpha * x_tilde + (1.0 - alpha) * x;
        const Eigen::VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
        z_next = (z_relaxed + y.cwiseQuotient(rho_vec)).cwiseMax(lo).cwiseMin(hi);
        y_prev = y;
        y += rho_vec.cwiseProduct(z_relaxed - z_next);
        z = z_next;
        out.iterations = it;

        if (it % 5 != 0 && it != settings.max_iterations)
            continue;
        const Eigen::VectorXd ax = a * x;
        const Eigen::VectorXd hx = h * x;
        const Eigen::VectorXd aty = a.transpose() * y;
        const double r_prim = inf_norm(ax - z);
        const double r_dual = inf_norm(hx + c + aty);
        const double prim_scale = std::max(inf_norm(ax), inf_norm(z));
        const double dual_scale = std::max({inf_norm(hx), inf_norm(aty), inf_norm(c)});
        if (r_prim <= settings.abs_tol + settings.rel_tol * prim_scale &&
            r_dual <= settings.abs_tol + settings.rel_tol * dual_scale) {
            out.converged = true;
            break;
        }

        const Eigen::VectorXd dy = y - y_prev;
        const double dy_norm = inf_norm(dy);
        if (dy_norm > 0 && inf_norm(a.transpose() * dy) <= eps_inf * dy_norm) {
            double support = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                if (dy[k] > 0)
                    support += hi[k] == kInf ? kInf : hi[k] * dy[k];
                else if (dy[k] < 0)
                    support += lo[k] == -kInf ? kInf : lo[k] * dy[k];
            }
            if (support < -eps_inf * dy_norm)
                throw QpInfeasible("solve_qp: constraints are infeasible");
        }

        if (settings.adaptive_rho && it % 25 == 0) {
            const double ratio = (r_prim / std::max(prim_scale, 1e-30)) /
                                 std::max(r_dual / std::max(dual_scale, 1e-30), 1e-30);
            const double proposed = std::clamp(rho * std::sqrt(ratio), 1e-6, 1e6);
            if (proposed > 5.0 * rho || proposed < 0.2 * rho) {
                rho = proposed;
                refactor();
            }
        }
    }

    out.x = x;
    out.y = y;
    if (settings.polish && polish(h, c, a, lo, hi, z, y, std::max(settings.abs_tol, 1e-9), out))
        out.converged = true; // the polished point satisfies the KKT conditions
    out.objective = objective(h, c, out.x);
    return out;
}

} // namespace fluorsep
