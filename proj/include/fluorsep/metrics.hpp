#pragma once

#include <Eigen/Dense>

#include <span>
#include <string_view>

namespace fluorsep {

enum class Quantity { pixels, reflectance, donaldson, excitation, emission };
std::string_view to_string(Quantity q);

/// Root-mean-square difference. With `normalized`, each argument is first
/// divided by its own maximum; the truth must have a positive maximum, and
/// an estimate without a positive maximum is compared as is.
double rmse(const Eigen::Ref<const Eigen::MatrixXd> &estimate,
            const Eigen::Ref<const Eigen::MatrixXd> &truth, bool normalized = false);

struct Summary {
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation (n - 1)
    double se = 0.0; ///< sd / sqrt(n)
    int count = 0;
};
Summary summarize(std::span<const double> values);

/// Mean and spread of absolute and normalized RMSE over a patch set.
struct RmseReport {
    Quantity quantity;
    Summary absolute;
    Summary normalized;
};
RmseReport make_report(Quantity quantity, std::span<const double> absolute,
                       std::span<const double> normalized);

} // namespace fluorsep
