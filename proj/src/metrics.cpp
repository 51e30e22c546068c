#include <fluorsep/metrics.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fluorsep {

std::string_view to_string(Quantity q) {
    switch (q) {
    case Quantity::pixels: return "pixels";
    case Quantity::reflectance: return "reflectance";
    case Quantity::donaldson: return "donaldson";
    case Quantity::excitation: return "excitation";
    case Quantity::emission: return "emission";
    }
    return "unknown";
}

double rmse(const Eigen::Ref<const Eigen::MatrixXd> &estimate,
            const Eigen::Ref<const Eigen::MatrixXd> &truth, bool normalized) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw std::invalid_argument("rmse: estimate is " + std::to_string(estimate.rows()) + "x" +
                                    std::to_string(estimate.cols()) + ", truth is " +
                                    std::to_string(truth.rows()) + "x" +
                                    std::to_string(truth.cols()));
    if (truth.size() == 0)
        throw std::invalid_argument("rmse: empty input");
    if (!normalized)
        return std::sqrt((estimate - truth).squaredNorm() / static_cast<double>(truth.size()));
    const double t = truth.maxCoeff();
    if (!(t > 0))
        throw std::invalid_argument("rmse: normalized RMSE needs a truth with a positive maximum");
    const double e = estimate.maxCoeff();
    const double scale = e > 0 ? 1.0 / e : 1.0;
    return std::sqrt((estimate * scale - truth / t).squaredNorm() /
                     static_cast<double>(truth.size()));
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = static_cast<int>(values.size());
    if (values.empty())
        return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (s.count - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.count));
    }
    return s;
}

RmseReport make_report(Quantity quantity, std::span<const double> absolute,
                       std::span<const double> normalized) {
    return {quantity, summarize(absolute), summarize(normalized)};
}

} // namespace fluorsep
