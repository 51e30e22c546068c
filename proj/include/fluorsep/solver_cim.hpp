#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/linearized_system.hpp>
#include <fluorsep/solver_single.hpp>
#include <fluorsep/spectral.hpp>

#include <vector>

namespace fluorsep {

using CimTuning = SingleTuning;

/// Chromaticity-invariant estimate: an emission shape and one fluorescence
/// intensity per illuminant. There is no excitation spectrum.
struct CimEstimate {
    WeightVector w_r;
    WeightVector w_m;
    Eigen::VectorXd p; ///< per-illuminant intensity, length j
    Spectrum reflectance;
    Spectrum emission; ///< peak 1 unless degenerate
    std::vector<double> history;
    int outer_iterations = 0;
    bool converged = false;
    bool degenerate = false;
    double normalization_factor = 1.0;
    double objective = 0.0;
    double residual_norm = 0.0;
};

/// Minimizes
///
///   ||M - G o (C^T diag(B_r w_r) L + C^T B_m w_m p^T)||_F^2
///       + alpha ||grad B_r w_r||^2 + beta ||grad B_m w_m||^2 ||p||^2
///
/// subject to 0 <= B_r w_r <= 1, B_m w_m >= 0, p >= 0, alternating QPs over
/// (w_r, w_m) and (w_r, p). The emission roughness is weighted by ||p||^2 so
/// the objective does not depend on how intensity is split between w_m and p.
class CimSolver {
public:
    CimSolver(BasisSet bases, CimTuning tuning);

    CimEstimate solve(const MeasurementGrid &m) const;

    double objective(const MeasurementGrid &m, const WeightVector &w_r, const WeightVector &w_m,
                     const Eigen::VectorXd &p) const;

    const BasisSet &bases() const { return bases_; }
    const CimTuning &tuning() const { return tuning_; }

private:
    BasisSet bases_;
    CimTuning tuning_;
    BasisOperators ops_;
};

CimEstimate estimate_cim(const MeasurementGrid &m, const BasisSet &bases, const CimTuning &tuning);

/// Predicted pixels G o (C^T diag(r) L + C^T e p^T) for given spectra.
Eigen::MatrixXd predict_cim_pixels(const Eigen::VectorXd &reflectance,
                                   const Eigen::VectorXd &emission, const Eigen::VectorXd &p,
                                   const MeasurementGrid &m);

} // namespace fluorsep
