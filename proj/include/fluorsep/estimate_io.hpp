#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/solver_cim.hpp>
#include <fluorsep/solver_multi.hpp>
#include <fluorsep/solver_single.hpp>
#include <fluorsep/spectral.hpp>
#include <fluorsep/system_io.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fluorsep {

/// Model-independent view of a solver result, as stored on disk.
struct EstimateRecord {
    std::string name;
    Model model = Model::multi;

    Spectrum reflectance = Spectrum::zeros(WavelengthGrid::standard(), SpectralRole::reflectance);
    std::optional<DonaldsonMatrix> donaldson; ///< multi and single
    std::optional<Spectrum> excitation;       ///< single
    std::optional<Spectrum> emission;         ///< single and cim
    std::vector<std::string> illuminant_names;
    Eigen::VectorXd p; ///< cim: per-illuminant intensity

    WeightVector w_r;
    WeightMatrix w;   ///< multi
    WeightVector w_x; ///< single
    WeightVector w_m; ///< single and cim

    Eigen::MatrixXd fitted; ///< predicted pixels from the stored spectra
    double pixel_rmse = 0.0;
    double residual_norm = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    double normalization_factor = 1.0;
    std::vector<double> history; ///< objective per iteration

    /// Surface for relighting; throws for cim, whose fluorescence depends
    /// on the measured illuminants.
    SurfacePatch surface() const;
};

EstimateRecord make_record(std::string name, const MultiEstimate &e, const MeasurementGrid &m);
EstimateRecord make_record(std::string name, const SingleEstimate &e, const MeasurementGrid &m);
EstimateRecord make_record(std::string name, const CimEstimate &e, const MeasurementGrid &m);

/// Writes `<out>/estimates/<name>.json` and the spectra it refers to:
/// `<out>/spectra/<name>.csv` (reflectance plus any excitation/emission),
/// `<out>/spectra/<name>_donaldson.csv` and, for cim,
/// `<out>/spectra/<name>_p.csv` (one row, one column per illuminant).
void write_estimate(const std::filesystem::path &out, const EstimateRecord &record);

/// Reads an estimate JSON and its spectra. Fitted pixels are not restored.
EstimateRecord load_estimate(const std::filesystem::path &path);

} // namespace fluorsep
