#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/linearized_system.hpp>
#include <fluorsep/qp.hpp>
#include <fluorsep/spectral.hpp>

#include <cstdint>
#include <vector>

namespace fluorsep {

struct SingleTuning {
    double alpha = 0.01; ///< reflectance roughness weight
    double beta = 0.1;   ///< excitation/emission roughness weight
    int max_outer_iterations = 200;
    double objective_tol = 1e-6; ///< relative change between outer iterations
    /// Extra starts from random excitation guesses; the lowest objective wins.
    int restarts = 0;
    std::uint64_t seed = 0;
    QpSettings qp;

    void validate() const;
};

struct SingleEstimate {
    WeightVector w_r;
    WeightVector w_x;
    WeightVector w_m;
    Spectrum reflectance;
    Spectrum excitation;
    Spectrum emission; ///< peak 1 unless degenerate
    DonaldsonMatrix donaldson;
    std::vector<double> history; ///< objective after each outer iteration
    int outer_iterations = 0;
    bool converged = false;
    /// No fluorescence was found; excitation and emission are zero.
    bool degenerate = false;
    /// Factor the raw emission was divided by (and the excitation multiplied by).
    double normalization_factor = 1.0;
    double objective = 0.0;
    double residual_norm = 0.0;
};

/// Single-fluorophore estimator. The Donaldson matrix is the rank-one
/// T o (e_m e_x^T) with e_x = B_x w_x, e_m = B_m w_m, and the objective is
///
///   ||M - M_hat||_F^2 + alpha ||grad B_r w_r||^2
///       + beta (||grad e_m||^2 ||e_x||^2 + ||e_m||^2 ||grad e_x||^2)
///
/// The roughness terms are those of the unmasked outer product e_m e_x^T, so
/// the objective does not change under (w_x * s, w_m / s).
/// subject to 0 <= B_r w_r <= 1, B_x w_x >= 0, B_m w_m >= 0. It is biconvex:
/// the solver alternates QPs over (w_r, w_m) and (w_r, w_x).
class SingleSolver {
public:
    SingleSolver(BasisSet bases, SingleTuning tuning);

    SingleEstimate solve(const MeasurementGrid &m) const;

    /// Objective for raw (unnormalized) weights.
    double objective(const LinearizedSystem &sys, const WeightVector &w_r, const WeightVector &w_x,
                     const WeightVector &w_m) const;

    const BasisSet &bases() const { return bases_; }
    const BasisOperators &operators() const { return ops_; }
    const SingleTuning &tuning() const { return tuning_; }

private:
    SingleEstimate solve_from(const LinearizedSystem &sys, WeightVector w_x) const;
    SingleEstimate finish(const LinearizedSystem &sys, SingleEstimate est) const;

    BasisSet bases_;
    SingleTuning tuning_;
    BasisOperators ops_;
};

SingleEstimate estimate_single(const MeasurementGrid &m, const BasisSet &bases,
                               const SingleTuning &tuning);

/// Rescales emission to peak 1 and folds the factor into the excitation and
/// weights. Throws std::invalid_argument for an all-zero emission.
SingleEstimate normalize_scaling(const SingleEstimate &estimate);

/// vec(W) for W = w_m w_x^T in the row-major layout of BasisOperators.
Eigen::VectorXd outer_weights(const WeightVector &w_m, const WeightVector &w_x);

} // namespace fluorsep
