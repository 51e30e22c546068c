#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/spectral.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace fluorsep {

/// Total radiance l o r + D l of a surface under `illuminant`.
Spectrum relight(const SurfacePatch &surface, const Spectrum &illuminant);

using Rgb = std::array<double, 3>;

/// gain * C^T radiance for a three-filter camera.
Rgb render_camera(const Spectrum &radiance, const CameraModel &rgb_camera, double gain = 1.0);

/// Pixel values of `surface` under every illuminant of `system`, computed by
/// relighting and then integrating against each filter.
Eigen::MatrixXd render_measurement(const SurfacePatch &surface, const ImagingSystem &system,
                                   const GainMatrix &gains);

/// Row-major RGB image with linear values.
class RgbImage {
public:
    RgbImage(int width, int height);
    RgbImage(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<double> &values() const { return values_; }

    Rgb at(int x, int y) const;
    void set(int x, int y, const Rgb &rgb);

    bool operator==(const RgbImage &) const = default;

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

struct RmseMap {
    int width = 0;
    int height = 0;
    std::vector<double> values; ///< row-major, one entry per pixel
    double mean = 0.0;
};

/// Per-pixel RMSE over the three channels. Both images must have the same
/// size and values in [0, 1].
RmseMap rgb_rmse_map(const RgbImage &predicted, const RgbImage &captured);

/// Binary P6 with maxval 255. Writing rounds values clamped to [0, 1].
void write_ppm(const std::filesystem::path &path, const RgbImage &image);
RgbImage read_ppm(const std::filesystem::path &path);
std::string format_ppm(const RgbImage &image);
RgbImage parse_ppm(const std::string &bytes, const std::string &source = "<memory>");

/// Lossless text form: header `x,y,r,g,b`, one row per pixel.
std::string format_rgb_csv(const RgbImage &image);
RgbImage parse_rgb_csv(const std::string &text, const std::string &source = "<memory>");

} // namespace fluorsep
