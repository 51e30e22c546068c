#pragma once

#include <fluorsep/spectral.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluorsep {

/// Malformed input file. Line and column are 1-based; zero means unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, int column, const std::string &message);

    const std::string &file() const { return file_; }
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string &detail() const { return detail_; }

private:
    std::string file_;
    int line_;
    int column_;
    std::string detail_;
};

/// Contents of a `wavelength_nm,<name>,...` file: one column per named
/// spectrum, rows strictly increasing in wavelength.
struct SpectralTable {
    std::vector<double> wavelengths;
    std::vector<std::string> names;
    Eigen::MatrixXd values; // rows = wavelengths, cols = names

    int columns() const { return static_cast<int>(names.size()); }
    /// Column `c` interpolated onto `grid`.
    Spectrum spectrum(int c, const WavelengthGrid &grid,
                      SpectralRole role = SpectralRole::generic) const;
    std::vector<Spectrum> spectra(const WavelengthGrid &grid,
                                  SpectralRole role = SpectralRole::generic) const;
    /// Uniform grid implied by the rows; throws if the spacing is uneven.
    WavelengthGrid native_grid() const;
};

SpectralTable parse_spectral_csv(const std::string &text, const std::string &source = "<memory>");
SpectralTable read_spectral_csv(const std::filesystem::path &path);

/// Writes a spectral table; `columns` must all be on `grid`.
std::string format_spectral_csv(const WavelengthGrid &grid, const std::vector<std::string> &names,
                                const Eigen::MatrixXd &columns);
void write_spectral_csv(const std::filesystem::path &path, const WavelengthGrid &grid,
                        const std::vector<std::string> &names, const Eigen::MatrixXd &columns);

/// Bispectral matrix as CSV: header `wavelength_nm,<excitation wavelengths>`,
/// one row per emission wavelength.
std::string format_donaldson_csv(const DonaldsonMatrix &donaldson);
DonaldsonMatrix parse_donaldson_csv(const std::string &text, const std::string &source = "<memory>");

/// Shortest decimal text that round-trips the double.
std::string format_number(double value);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text_file(const std::filesystem::path &path);
/// Writes through a temporary file and renames it into place.
void write_text_file_atomic(const std::filesystem::path &path, const std::string &contents);

} // namespace fluorsep
