#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/linearized_system.hpp>
#include <fluorsep/spectral.hpp>

#include <functional>
#include <vector>

namespace fluorsep {

struct MultiTuning {
    double alpha = 0.001; ///< reflectance roughness weight
    double beta = 0.001;  ///< Donaldson row/column roughness weight
    double eta = 0.001;   ///< nuclear-norm weight on W
    double rho = 1.0;     ///< ADMM penalty
    int max_iterations = 2000;
    double primal_tol = 1e-5; ///< relative
    double dual_tol = 1e-5;   ///< relative
    /// Double/halve rho when the relative residuals differ by more than 10x.
    bool adaptive_rho = false;

    void validate() const;
};

struct IterationRecord {
    double objective;
    double primal_residual;
    double dual_residual;
    double rho;
};

struct MultiEstimate {
    WeightVector w_r;
    WeightMatrix w; ///< n_m x n_x
    Spectrum reflectance;
    DonaldsonMatrix donaldson;
    std::vector<IterationRecord> history;
    int iterations_run = 0;
    bool converged = false;
    /// ||M - M_hat||_F of the final weights.
    double residual_norm = 0.0;
    double objective = 0.0;
};

/// Called after every ADMM iteration with the current weights.
using MultiObserver =
    std::function<void(int iteration, const WeightVector &w_r, const WeightMatrix &w)>;

/// Relaxed multi-fluorophore estimator:
///
///   min ||M - G o C^T (diag(B_r w_r) + T o B_m W B_x^T) L||_F^2
///       + alpha ||grad B_r w_r||^2 + beta ||grad D||_F^2 + beta ||D grad^T||_F^2
///       + eta ||W||_*
///   s.t. 0 <= B_r w_r <= 1,  0 <= D = T o B_m W B_x^T
///
/// solved by ADMM over x = (w_r, W) with copies z1 = B_r w_r (box),
/// z2 = D (nonnegative) and z3 = W (nuclear prox). The smooth terms stay in
/// the x-update, whose system matrix is factored once per rho.
class MultiSolver {
public:
    MultiSolver(BasisSet bases, MultiTuning tuning);

    MultiEstimate solve(const MeasurementGrid &m, const MultiObserver &observer = {}) const;

    const BasisSet &bases() const { return bases_; }
    const BasisOperators &operators() const { return ops_; }
    const MultiTuning &tuning() const { return tuning_; }

    /// Objective value (without constraints) for stacked weights.
    double objective(const LinearizedSystem &sys, const WeightVector &w_r,
                     const WeightMatrix &w) const;

private:
    BasisSet bases_;
    MultiTuning tuning_;
    BasisOperators ops_;
};

MultiEstimate estimate_multi(const MeasurementGrid &m, const BasisSet &bases,
                             const MultiTuning &tuning);

/// Replaces W by its best rank-n approximation and rebuilds the Donaldson
/// matrix. Reflectance and diagnostics are kept.
MultiEstimate truncate_rank(const MultiEstimate &estimate, const BasisSet &bases, int n);

/// Reflectance clamped to [0, 1] and Donaldson matrix clamped to >= 0,
/// both reconstructed from basis weights.
Spectrum reflectance_from_weights(const LinearBasis &basis, const WeightVector &w_r);
DonaldsonMatrix donaldson_from_weights(const BasisSet &bases, const WeightMatrix &w);

} // namespace fluorsep
