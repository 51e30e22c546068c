#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace fluorsep {

struct QpSettings {
    int max_iterations = 20000;
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double rho = 0.1;
    double sigma = 1e-6;
    double relaxation = 1.6;
    bool adaptive_rho = true;
    /// Refine the ADMM answer by solving the KKT system on the guessed
    /// active set.
    bool polish = true;
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd y; ///< constraint multipliers
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool polished = false;
};

class QpInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// minimize 1/2 x^T H x + c^T x  subject to  lo <= A x <= hi.
///
/// Entries of lo/hi may be infinite. Operator-splitting ADMM on the
/// equivalent problem with z = A x. Throws std::invalid_argument for a
/// Hessian that is not positive semidefinite and QpInfeasible when the
/// iterates certify primal infeasibility. `warm_x`/`warm_y` are optional
/// starting points (empty vectors mean zero).
QpResult solve_qp(const Eigen::MatrixXd &h, const Eigen::VectorXd &c, const Eigen::MatrixXd &a,
                  const Eigen::VectorXd &lo, const Eigen::VectorXd &hi,
                  const QpSettings &settings = {}, const Eigen::VectorXd &warm_x = {},
                  const Eigen::VectorXd &warm_y = {});

} // namespace fluorsep
