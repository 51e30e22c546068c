#pragma once

#include <Eigen/Dense>

namespace fluorsep {

/// (d-1) x d first-difference operator; row k computes x[k] - x[k+1].
/// No row is emitted for the last bin.
Eigen::MatrixXd difference_operator(int d);

/// Elementwise clamp to [lo, hi].
Eigen::VectorXd project_box(const Eigen::VectorXd &x, double lo, double hi);

/// Singular value soft-thresholding, the proximal map of
/// threshold * ||.||_* under the Frobenius norm.
Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd &w, double threshold);

double nuclear_norm(const Eigen::MatrixXd &w);

/// Closest rank-n matrix in Frobenius norm (truncated SVD).
Eigen::MatrixXd best_rank_approximation(const Eigen::MatrixXd &w, int n);

} // namespace fluorsep
