#pragma once

#include <fluorsep/spectral.hpp>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace fluorsep {

/// Monochrome sensor behind a set of colour filters.
class CameraModel {
public:
    CameraModel(Spectrum quantum_efficiency, std::vector<Spectrum> filters,
                std::vector<std::string> names = {});

    const WavelengthGrid &grid() const { return qe_.grid(); }
    const Spectrum &quantum_efficiency() const { return qe_; }
    const std::vector<Spectrum> &filters() const { return filters_; }
    const std::vector<std::string> &names() const { return names_; }
    int channels() const { return static_cast<int>(filters_.size()); }

    /// diag(q_e) * [s_1 ... s_i], d x i.
    const Eigen::MatrixXd &responsivity() const { return responsivity_; }

private:
    Spectrum qe_;
    std::vector<Spectrum> filters_;
    std::vector<std::string> names_;
    Eigen::MatrixXd responsivity_;
};

class IlluminantSet {
public:
    IlluminantSet(std::vector<Spectrum> illuminants, std::vector<std::string> names = {});

    const WavelengthGrid &grid() const { return illuminants_.front().grid(); }
    const std::vector<Spectrum> &illuminants() const { return illuminants_; }
    const std::vector<std::string> &names() const { return names_; }
    int count() const { return static_cast<int>(illuminants_.size()); }

    /// d x j, one illuminant per column.
    const Eigen::MatrixXd &matrix() const { return matrix_; }

private:
    std::vector<Spectrum> illuminants_;
    std::vector<std::string> names_;
    Eigen::MatrixXd matrix_;
};

/// Camera and lights that together produce an i x j measurement.
struct ImagingSystem {
    CameraModel camera;
    IlluminantSet illuminants;

    ImagingSystem(CameraModel c, IlluminantSet l);

    const WavelengthGrid &grid() const { return camera.grid(); }
    int filters() const { return camera.channels(); }
    int lights() const { return illuminants.count(); }
};

/// Per filter/illuminant gain, strictly positive.
class GainMatrix {
public:
    explicit GainMatrix(Eigen::MatrixXd values);
    static GainMatrix uniform(int filters, int illuminants, double gain = 1.0);

    const Eigen::MatrixXd &values() const { return values_; }
    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }

private:
    Eigen::MatrixXd values_;
};

struct SurfacePatch {
    Spectrum reflectance;
    DonaldsonMatrix donaldson;

    SurfacePatch(Spectrum r, DonaldsonMatrix d);
    /// Non-fluorescent patch.
    static SurfacePatch reflective(Spectrum r);
};

/// Pixel values observed through every filter under every illuminant,
/// together with the system and gains that produced them.
class MeasurementGrid {
public:
    MeasurementGrid(Eigen::MatrixXd values, std::shared_ptr<const ImagingSystem> system,
                    GainMatrix gains);

    const Eigen::MatrixXd &values() const { return values_; }
    const ImagingSystem &system() const { return *system_; }
    std::shared_ptr<const ImagingSystem> system_ptr() const { return system_; }
    const CameraModel &camera() const { return system_->camera; }
    const IlluminantSet &illuminants() const { return system_->illuminants; }
    const GainMatrix &gains() const { return gains_; }
    const WavelengthGrid &grid() const { return system_->grid(); }

    MeasurementGrid with_values(Eigen::MatrixXd values) const;

private:
    Eigen::MatrixXd values_;
    std::shared_ptr<const ImagingSystem> system_;
    GainMatrix gains_;
};

/// M = G o C^T (diag(r) + D) L.
Eigen::MatrixXd predict_pixels(const Eigen::VectorXd &reflectance,
                               const Eigen::MatrixXd &donaldson, const ImagingSystem &system,
                               const GainMatrix &gains);

MeasurementGrid simulate(const SurfacePatch &patch, std::shared_ptr<const ImagingSystem> system,
                         const GainMatrix &gains);

enum class GainMode {
    uniform,    ///< one scalar for every filter/illuminant pair
    per_filter, ///< each filter row scaled to its own maximum
};

/// Gains that bring the largest simulated pixel value to one.
GainMatrix calibrate_gain_max_one(const SurfacePatch &patch, const ImagingSystem &system,
                                  GainMode mode = GainMode::uniform);

struct RadianceComponents {
    Spectrum reflected;
    Spectrum fluoresced;

    Spectrum total() const;
};

RadianceComponents decompose_radiance(const SurfacePatch &patch, const Spectrum &illuminant);

/// Pass as `snr_db` to disable noise.
inline constexpr double kNoiseFree = std::numeric_limits<double>::infinity();

/// Additive white Gaussian noise with variance mean(M^2) / 10^(snr_db/10).
MeasurementGrid add_noise(const MeasurementGrid &m, double snr_db, std::uint64_t seed);

/// `count` contiguous rectangular passbands covering the grid. Widths differ
/// by at most one bin and the channels sum to one in every bin.
std::vector<Spectrum> rect_channels(int count, const WavelengthGrid &grid, SpectralRole role);

/// Rectangular filters (unit quantum efficiency) and rectangular lights.
ImagingSystem make_rect_system(int n_filters, int n_illuminants, const WavelengthGrid &grid);

/// C = L = I: one-bin filters under one-bin lights.
ImagingSystem make_bispectral_system(const WavelengthGrid &grid);

} // namespace fluorsep
