#include <fluorsep/bootstrap.hpp>
#include <fluorsep/parallel.hpp>
#include <fluorsep/random.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace fluorsep {

double percentile(std::vector<double> values, double q) {
    if (values.empty())
        throw std::invalid_argument("percentile: no values");
    if (!(q >= 0 && q <= 100))
        throw std::invalid_argument("percentile: q must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapResult bootstrap_ci(std::span<const MeasurementGrid> samples,
                             const SpectrumEstimator &estimator, int replicates,
                             std::uint64_t seed) {
    if (samples.empty())
        throw std::invalid_argument("bootstrap_ci: no pixel samples");
    if (replicates < 2)
        throw std::invalid_argument("bootstrap_ci: at least 2 replicates are required");
    if (!estimator)
        throw std::invalid_argument("bootstrap_ci: missing estimator");
    const auto &first = samples.front();
    for (const auto &s : samples)
        if (s.values().rows() != first.values().rows() || s.values().cols() != first.values().cols())
            throw std::invalid_argument("bootstrap_ci: samples have different shapes");
    const int d = first.grid().size();
    const auto n = samples.size();

    std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(replicates));
    parallel_for(draws.size(), [&](std::size_t r) {
        Rng rng{stream_seed(seed, "bootstrap", r)};
        std::uniform_int_distribution<std::size_t> pick{0, n - 1};
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(first.values().rows(), first.values().cols());
        for (std::size_t k = 0; k < n; ++k)
            mean += samples[pick(rng)].values();
        mean /= static_cast<double>(n);
        Eigen::VectorXd v = estimator(first.with_values(std::move(mean)));
        if (v.size() != d)
            throw std::invalid_argument("bootstrap_ci: estimator returned " +
                                        std::to_string(v.size()) + " values for a " +
                                        std::to_string(d) + "-bin grid");
        draws[r] = std::move(v);
    });

    Eigen::VectorXd lower(d), upper(d);
    std::vector<double> column(draws.size());
    for (int k = 0; k < d; ++k) {
        for (std::size_t r = 0; r < draws.size(); ++r)
            column[r] = draws[r][k];
        lower[k] = percentile(column, 2.5);
        upper[k] = percentile(column, 97.5);
    }
    return {Spectrum{first.grid(), std::move(lower)}, Spectrum{first.grid(), std::move(upper)},
            replicates};
}

} // namespace fluorsep
