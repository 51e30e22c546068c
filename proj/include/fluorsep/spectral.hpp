#pragma once

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace fluorsep {

using WeightVector = Eigen::VectorXd;
using WeightMatrix = Eigen::MatrixXd;

/// Uniformly sampled wavelength axis, in nanometres.
class WavelengthGrid {
public:
    WavelengthGrid(double start_nm, double step_nm, int count);

    /// 380 nm to 1000 nm at 4 nm (156 bins).
    static WavelengthGrid standard();
    /// `count` samples from `first_nm` to `last_nm` inclusive.
    static WavelengthGrid spanning(double first_nm, double last_nm, int count);

    double start() const { return start_; }
    double step() const { return step_; }
    int size() const { return count_; }
    double last() const { return start_ + step_ * (count_ - 1); }
    double wavelength(int k) const { return start_ + step_ * k; }
    Eigen::VectorXd wavelengths() const;

    bool operator==(const WavelengthGrid &) const = default;

private:
    double start_;
    double step_;
    int count_;
};

enum class SpectralRole { generic, reflectance, illuminant, filter, excitation, emission };

std::string_view to_string(SpectralRole role);

/// Sampled spectral function. The role decides which range checks apply:
/// reflectance must lie in [0, 1]; illuminant, filter, excitation and
/// emission must be nonnegative.
class Spectrum {
public:
    Spectrum(WavelengthGrid grid, Eigen::VectorXd values,
             SpectralRole role = SpectralRole::generic);

    static Spectrum zeros(const WavelengthGrid &grid,
                          SpectralRole role = SpectralRole::generic);
    /// Narrowband spectrum with `amplitude` in bin `bin` only.
    static Spectrum monochromatic(const WavelengthGrid &grid, int bin, double amplitude = 1.0,
                                  SpectralRole role = SpectralRole::illuminant);

    const WavelengthGrid &grid() const { return grid_; }
    const Eigen::VectorXd &values() const { return values_; }
    SpectralRole role() const { return role_; }
    int size() const { return grid_.size(); }
    double operator[](int k) const { return values_[k]; }

private:
    WavelengthGrid grid_;
    Eigen::VectorXd values_;
    SpectralRole role_;
};

/// Bispectral excitation/emission matrix. Rows index the emission
/// wavelength and columns the excitation wavelength. Entries on and above
/// the diagonal are zero (emission is always at a longer wavelength).
class DonaldsonMatrix {
public:
    /// Nonnegativity is checked to within `tolerance`.
    DonaldsonMatrix(WavelengthGrid grid, Eigen::MatrixXd entries, double tolerance = 1e-6);

    static DonaldsonMatrix zeros(const WavelengthGrid &grid);

    const WavelengthGrid &grid() const { return grid_; }
    const Eigen::MatrixXd &entries() const { return entries_; }
    int size() const { return grid_.size(); }

private:
    WavelengthGrid grid_;
    Eigen::MatrixXd entries_;
};

enum class BasisFamily { reflectance, excitation, emission };

std::string_view to_string(BasisFamily family);
BasisFamily basis_family_from_string(std::string_view name);

inline constexpr double kOrthonormalityTolerance = 1e-10;

/// Orthonormal columns spanning a family of spectra.
class LinearBasis {
public:
    LinearBasis(WavelengthGrid grid, Eigen::MatrixXd functions, BasisFamily family);

    const WavelengthGrid &grid() const { return grid_; }
    const Eigen::MatrixXd &functions() const { return functions_; }
    BasisFamily family() const { return family_; }
    int size() const { return static_cast<int>(functions_.cols()); }

    /// Least-squares weights of `values` (orthogonal projection).
    WeightVector project(const Eigen::VectorXd &values) const;

    /// First `k` columns.
    LinearBasis truncated(int k) const;

private:
    WavelengthGrid grid_;
    Eigen::MatrixXd functions_;
    BasisFamily family_;
};

/// Reflectance, excitation and emission bases on one grid.
struct BasisSet {
    LinearBasis reflectance;
    LinearBasis excitation;
    LinearBasis emission;

    const WavelengthGrid &grid() const { return reflectance.grid(); }
};

struct Fluorophore {
    Spectrum excitation;
    Spectrum emission;
};

/// Top-k left singular vectors of the raw (not mean-subtracted) sample
/// matrix. Signs are fixed so the largest-magnitude entry of each column is
/// positive.
LinearBasis derive_basis(std::span<const Spectrum> samples, int k, BasisFamily family);

/// Fraction of the total squared norm of `samples` captured by projection
/// onto `basis`.
double variance_explained(const LinearBasis &basis, std::span<const Spectrum> samples);

Spectrum synthesize(const LinearBasis &basis, const WeightVector &weights,
                    SpectralRole role = SpectralRole::generic);

/// d x d matrix with ones strictly below the diagonal.
Eigen::MatrixXd stokes_mask(int d);

/// Sum of emission * excitation^T over all fluorophores with the Stokes
/// mask applied.
DonaldsonMatrix donaldson_from_fluorophores(std::span<const Fluorophore> fluorophores);

/// Linear interpolation onto `target`, zero outside the source range.
Spectrum resample(const Spectrum &spectrum, const WavelengthGrid &target);

/// Same as above for raw samples on an arbitrary increasing axis.
Eigen::VectorXd resample(const std::vector<double> &wavelengths, const Eigen::VectorXd &values,
                         const WavelengthGrid &target);

/// Throws std::invalid_argument naming both grids when they differ.
void require_same_grid(const WavelengthGrid &a, const WavelengthGrid &b, std::string_view what);

} // namespace fluorsep
