#include <fluorsep/operators.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fluorsep {

Eigen::MatrixXd difference_operator(int d) {
    if (d < 2)
        throw std::invalid_argument("difference_operator: d must be at least 2");
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(d - 1, d);
    for (int k = 0; k < d - 1; ++k) {
        op(k, k) = 1.0;
        op(k, k + 1) = -1.0;
    }
    return op;
}

Eigen::VectorXd project_box(const Eigen::VectorXd &x, double lo, double hi) {
    if (!(lo <= hi))
        throw std::invalid_argument("project_box: lower bound exceeds upper bound");
    return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd &w, double threshold) {
    if (!w.allFinite())
        throw std::invalid_argument("prox_nuclear: non-finite input");
    if (!(threshold >= 0) || !std::isfinite(threshold))
        throw std::invalid_argument("prox_nuclear: threshold must be finite and nonnegative");
    if (threshold == 0 || w.size() == 0)
        return w;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd shrunk =
        (svd.singularValues().array() - threshold).cwiseMax(0.0).matrix();
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

double nuclear_norm(const Eigen::MatrixXd &w) {
    if (w.size() == 0)
        return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues().sum();
}

Eigen::MatrixXd best_rank_approximation(const Eigen::MatrixXd &w, int n) {
    const auto max_rank = std::min(w.rows(), w.cols());
    if (n < 1 || n > max_rank)
        throw std::invalid_argument("best_rank_approximation: rank must be in [1, " +
                                    std::to_string(max_rank) + "], got " + std::to_string(n));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU().leftCols(n) * svd.singularValues().head(n).asDiagonal() *
           svd.matrixV().leftCols(n).transpose();
}

} // namespace fluorsep
