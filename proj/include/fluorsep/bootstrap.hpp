#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/spectral.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fluorsep {

/// Maps a measurement to the spectrum whose interval is wanted (for example
/// the estimated emission).
using SpectrumEstimator = std::function<Eigen::VectorXd(const MeasurementGrid &)>;

struct BootstrapResult {
    Spectrum lower; ///< 2.5th percentile per bin
    Spectrum upper; ///< 97.5th percentile per bin
    int replicates = 0;
};

inline constexpr int kDefaultReplicates = 100;

/// Percentile bootstrap over pixels: each replicate draws samples.size()
/// pixels with replacement, averages their measurements and runs
/// `estimator` on the average. Replicate r draws from its own named random
/// stream, so the result depends only on `seed`.
BootstrapResult bootstrap_ci(std::span<const MeasurementGrid> samples,
                             const SpectrumEstimator &estimator,
                             int replicates = kDefaultReplicates, std::uint64_t seed = 0);

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

} // namespace fluorsep
