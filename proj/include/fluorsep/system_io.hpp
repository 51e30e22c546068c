#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/spectral.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fluorsep {

/// How simulate chooses the gain matrix.
struct GainSpec {
    enum class Kind { fixed, max_one, max_one_per_filter };
    Kind kind = Kind::max_one;
    Eigen::MatrixXd values; ///< for fixed; 1x1 means one value everywhere

    GainMatrix resolve(const SurfacePatch &patch, const ImagingSystem &system) const;
};

struct SystemFile {
    std::shared_ptr<const ImagingSystem> system;
    GainSpec gains;
};

/// System description in JSON. Either
///
///   {"generator": {"type": "rect", "filters": 20, "illuminants": 20}, "grid": {...}}
///   {"generator": {"type": "bispectral"}, "grid": {...}}
///
/// or explicit spectra in spectral CSV files (paths relative to the JSON):
///
///   {"grid": {"start_nm": 380, "step_nm": 4, "count": 156},
///    "camera": {"quantum_efficiency": "qe.csv", "filters": "filters.csv"},
///    "illuminants": "lights.csv",
///    "gains": "auto_max_one" | "auto_max_one_per_filter" | 2.0 | [[...], ...]}
///
/// `quantum_efficiency` may be omitted (unit efficiency). The grid defaults
/// to the standard grid; spectra are interpolated onto it.
SystemFile load_system(const std::filesystem::path &path);
SystemFile parse_system(const std::string &json_text, const std::filesystem::path &base_dir,
                        const std::string &source = "<memory>");

/// Writes system.json plus qe.csv, filters.csv and illuminants.csv into `dir`.
void write_system(const std::filesystem::path &dir, const ImagingSystem &system);

/// Basis functions from three spectral CSV files (one column per function).
/// Columns are interpolated onto `grid` and re-orthonormalized.
BasisSet load_bases(const std::filesystem::path &reflectance, const std::filesystem::path &excitation,
                    const std::filesystem::path &emission, const WavelengthGrid &grid);
LinearBasis orthonormalized(const WavelengthGrid &grid, const Eigen::MatrixXd &columns,
                            BasisFamily family);
void write_bases(const std::filesystem::path &dir, const BasisSet &bases);

/// A measurement on disk: pixel values, gains and the system file they
/// refer to (relative to the measurement file).
///
///   {"format": "fluorsep.measurement", "name": "...", "system": "../system/system.json",
///    "filters": [...], "illuminants": [...], "values": [[...]], "gains": [[...]]}
struct NamedMeasurement {
    std::string name;
    MeasurementGrid measurement;
};
NamedMeasurement load_measurement(const std::filesystem::path &path);
void write_measurement(const std::filesystem::path &path, const std::string &name,
                       const MeasurementGrid &m, const std::string &system_ref);

enum class Model { multi, single, cim };
std::string_view to_string(Model m);
Model model_from_string(std::string_view name);

/// Every setting a CLI command can use. Paths in a config file are
/// resolved against the file's directory when it is loaded. Precedence:
/// built-in defaults, then the config file, then command-line flags.
struct RunConfig {
    std::filesystem::path system;   ///< system JSON; empty means the bispectral standard system
    std::filesystem::path fixtures; ///< directory with reflectance/excitation/emission CSVs
    std::vector<int> patches;       ///< 1-based fixture patch numbers; empty means all
    /// Basis CSVs; when empty the bases are derived from the fixtures.
    std::filesystem::path reflectance_basis;
    std::filesystem::path excitation_basis;
    std::filesystem::path emission_basis;
    int n_r = 5;
    int n_x = 12;
    int n_m = 12;

    Model model = Model::multi;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> rho;
    std::optional<int> max_iterations;
    int restarts = 0;

    std::uint64_t seed = 0;
    std::filesystem::path out = "fluorsep-out";
    std::optional<double> snr_db; ///< simulate: add noise at this SNR
    std::vector<std::filesystem::path> measurements;

    std::string sweep;
    bool smoke = false;

    std::filesystem::path estimate;            ///< relight input
    std::filesystem::path relight_illuminants; ///< spectral CSV, one column per light
    std::filesystem::path rgb_camera;          ///< optional 3-column filter CSV
    double rgb_gain = 1.0;

    /// Throws std::invalid_argument on negative tuning or bad counts.
    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path &path);
RunConfig parse_run_config(const std::string &json_text, const std::filesystem::path &base_dir,
                           const std::string &source = "<memory>");
/// Canonical JSON echo of the effective configuration (for manifests).
std::string run_config_json(const RunConfig &config);

} // namespace fluorsep
