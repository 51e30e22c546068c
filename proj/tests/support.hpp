#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/spectral.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <random>

namespace fluorsep::test {

inline Eigen::MatrixXd uniform_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols,
                                      double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u{lo, hi};
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = u(rng);
    return m;
}

inline Eigen::VectorXd uniform_vector(Rng &rng, Eigen::Index n, double lo = 0.0, double hi = 1.0) {
    return uniform_matrix(rng, n, 1, lo, hi);
}

inline Eigen::MatrixXd gaussian_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n{0.0, 1.0};
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = n(rng);
    return m;
}

inline int uniform_int(Rng &rng, int lo, int hi) {
    return std::uniform_int_distribution<int>{lo, hi}(rng);
}

inline WavelengthGrid small_grid(int d) {
    return WavelengthGrid::spanning(400.0, 700.0, d);
}

/// Strictly lower-triangular nonnegative matrix, built entry by entry.
inline Eigen::MatrixXd random_donaldson(Rng &rng, int d, double scale = 0.1) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, d);
    std::uniform_real_distribution<double> u{0.0, scale};
    for (int o = 0; o < d; ++o)
        for (int p = 0; p < o; ++p)
            x(o, p) = u(rng);
    return x;
}

/// Random camera and lights with values in [0, 1].
inline std::shared_ptr<const ImagingSystem> random_system(Rng &rng, const WavelengthGrid &grid,
                                                          int filters, int lights) {
    const int d = grid.size();
    std::vector<Spectrum> f;
    std::vector<Spectrum> l;
    for (int k = 0; k < filters; ++k)
        f.emplace_back(grid, uniform_vector(rng, d), SpectralRole::filter);
    for (int k = 0; k < lights; ++k)
        l.emplace_back(grid, uniform_vector(rng, d), SpectralRole::illuminant);
    Spectrum qe{grid, uniform_vector(rng, d, 0.2, 1.0), SpectralRole::filter};
    return std::make_shared<const ImagingSystem>(CameraModel{std::move(qe), std::move(f)},
                                                 IlluminantSet{std::move(l)});
}

/// M[o][p] = G[o][p] * sum_a sum_b C[a][o] (diag(r) + D)[a][b] L[b][p],
/// with C = diag(q_e) S, written as explicit loops.
inline Eigen::MatrixXd triple_loop_pixels(const Eigen::VectorXd &r, const Eigen::MatrixXd &dm,
                                          const ImagingSystem &sys, const Eigen::MatrixXd &g) {
    const int d = static_cast<int>(r.size());
    const int i = sys.filters();
    const int j = sys.lights();
    Eigen::MatrixXd m(i, j);
    for (int o = 0; o < i; ++o) {
        for (int p = 0; p < j; ++p) {
            double acc = 0.0;
            for (int a = 0; a < d; ++a) {
                const double c = sys.camera.quantum_efficiency()[a] *
                                 sys.camera.filters()[static_cast<std::size_t>(o)][a];
                for (int b = 0; b < d; ++b) {
                    const double s = (a == b ? r[a] : 0.0) + dm(a, b);
                    acc += c * s * sys.illuminants.illuminants()[static_cast<std::size_t>(p)][b];
                }
            }
            m(o, p) = g(o, p) * acc;
        }
    }
    return m;
}

/// Orthonormal basis of k random smooth functions on `grid`.
inline LinearBasis random_basis(Rng &rng, const WavelengthGrid &grid, int k, BasisFamily family) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, grid.size(), k));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(grid.size(), k);
    return {grid, std::move(q), family};
}

inline Eigen::VectorXd gaussian_bump(const WavelengthGrid &grid, double centre, double sigma) {
    const Eigen::ArrayXd z = (grid.wavelengths().array() - centre) / sigma;
    return (-0.5 * z.square()).exp().matrix();
}

} // namespace fluorsep::test
