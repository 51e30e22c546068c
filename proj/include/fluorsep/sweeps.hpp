#pragma once

#include <fluorsep/fixtures.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fluorsep {

struct SweepPoint {
    std::string axis1;
    std::string axis2; ///< empty for one-dimensional sweeps
    double mean_rmse = 0.0;
    double std_err = 0.0;
};

struct SweepResult {
    std::string name;
    std::string axis1_name;
    std::string axis2_name;
    std::vector<SweepPoint> points;
    std::map<std::string, bool> flags;
};

/// Settings shared by all sweeps. Patches are the first `patch_count`
/// fixture patches resampled onto `grid`.
struct SweepOptions {
    WavelengthGrid grid = WavelengthGrid::standard();
    int patch_count = kFixturePatches;
    int n_r = 5;
    int n_x = 12;
    int n_m = 12;
    double alpha = 0.001;
    double beta = 0.001;
    double eta = 0.001;
    int max_iterations = 2000;
    std::uint64_t seed = 0;
    /// Rectangular filter/illuminant counts for the noise and convergence
    /// sweeps; 0 selects the bispectral system.
    int filters = 0;
    int illuminants = 0;
};

/// Mean normalized Donaldson RMSE on the bispectral system for every
/// (n_x, n_m) pair.
SweepResult sweep_bases(const FixtureSet &fixtures, const std::vector<int> &n_x_values,
                        const std::vector<int> &n_m_values, const SweepOptions &options);

/// Mean normalized Donaldson RMSE with rectangular filters and lights for
/// every (filters, illuminants) pair.
SweepResult sweep_channels(const FixtureSet &fixtures, const std::vector<int> &filters,
                           const std::vector<int> &illuminants, const SweepOptions &options);

/// Mean normalized Donaldson RMSE at each SNR (dB) over `instances` noise draws per patch. The standard error is taken over
/// the instances of each patch and averaged over patches. Sets the flag
/// `monotone` when, beyond 10 dB, no level is worse than the previous one by
/// more than one standard error.
SweepResult sweep_noise(const FixtureSet &fixtures, const std::vector<double> &snr_db,
                        int instances, const SweepOptions &options);

/// Mean normalized Donaldson RMSE of the multi solver after each ADMM
/// outer iterations. Both solvers use the alpha and beta of `options`.
/// outer iterations.
SweepResult sweep_convergence(const FixtureSet &fixtures, const std::vector<int> &checkpoints,
                              const SweepOptions &options);

/// Long-form CSV with header `axis1,axis2,mean_rmse,std_err`.
std::string format_sweep_csv(const SweepResult &result);

/// Named presets used by the CLI: bases, channels, noise, convergence.
struct SweepPlan {
    std::string name;
    SweepOptions options;
    std::vector<double> axis1;
    std::vector<double> axis2;
    int instances = 0;
};
SweepPlan sweep_plan(const std::string &name, bool smoke);
SweepResult run_sweep(const FixtureSet &fixtures, const SweepPlan &plan);

} // namespace fluorsep
