#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/spectral.hpp>

namespace fluorsep {

/// Quantities that depend only on the bases (not on camera, lights or gains).
/// The fluorescence weights W (n_m x n_x) are flattened row-major:
/// index a * n_x + b holds W(a, b).
struct BasisOperators {
    explicit BasisOperators(const BasisSet &bases);

    int d;
    int n_r;
    int n_x;
    int n_m;
    int n_w() const { return n_m * n_x; }
    int n() const { return n_r + n_w(); }

    Eigen::MatrixXd br;
    Eigen::MatrixXd bx;
    Eigen::MatrixXd bm;

    /// (grad B_r)^T (grad B_r)
    Eigen::MatrixXd reflectance_roughness;
    /// (grad B_x)^T (grad B_x)
    Eigen::MatrixXd excitation_roughness;
    /// (grad B_m)^T (grad B_m)
    Eigen::MatrixXd emission_roughness;
    /// Quadratic form of ||grad D||_F^2 + ||D grad^T||_F^2 in vec(W),
    /// where D = T o (B_m W B_x^T).
    Eigen::MatrixXd donaldson_roughness;
    /// F^T F for F(W) = T o (B_m W B_x^T).
    Eigen::MatrixXd donaldson_gram;

    /// T o (B_m W B_x^T)
    Eigen::MatrixXd donaldson(const Eigen::MatrixXd &w) const;
    /// Adjoint of donaldson(): B_m^T (T o V) B_x.
    Eigen::MatrixXd donaldson_adjoint(const Eigen::MatrixXd &v) const;
};

Eigen::VectorXd flatten(const Eigen::MatrixXd &w);
Eigen::MatrixXd unflatten(const Eigen::VectorXd &v, int rows, int cols);

/// Explicit linear map from stacked weights x = [w_r; vec(W)] to the
/// measurement vector vec(M) (column-major), plus its normal-equation data.
class LinearizedSystem {
public:
    LinearizedSystem(const MeasurementGrid &m, const BasisOperators &ops);

    int measurements() const { return static_cast<int>(a_.rows()); }
    int filters() const { return filters_; }
    int lights() const { return lights_; }

    const Eigen::MatrixXd &a() const { return a_; }
    /// Columns for the reflectance weights.
    auto a_reflectance() const { return a_.leftCols(n_r_); }
    /// Columns for vec(W).
    auto a_fluorescence() const { return a_.rightCols(a_.cols() - n_r_); }

    const Eigen::VectorXd &m() const { return m_; }
    const Eigen::MatrixXd &gram() const { return gram_; }
    const Eigen::VectorXd &atm() const { return atm_; }
    double mm() const { return mm_; }

    /// ||A x - m||^2 evaluated from the normal-equation data.
    double data_term(const Eigen::VectorXd &x) const;
    /// Predicted pixel matrix for stacked weights.
    Eigen::MatrixXd predict(const Eigen::VectorXd &x) const;

private:
    int n_r_;
    int filters_;
    int lights_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd m_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd atm_;
    double mm_;
};

/// Columns G o C^T diag(b_k) L for each column b_k of `br`, as vec(M).
Eigen::MatrixXd reflectance_design(const MeasurementGrid &m, const Eigen::MatrixXd &br);

/// Validates that the bases live on the measurement grid and are finite.
void require_compatible(const MeasurementGrid &m, const BasisSet &bases, const char *who);

} // namespace fluorsep
