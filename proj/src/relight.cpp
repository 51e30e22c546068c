#include <fluorsep/relight.hpp>
#include <fluorsep/spectral_csv.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluorsep {

Spectrum relight(const SurfacePatch &surface, const Spectrum &illuminant) {
    return decompose_radiance(surface, illuminant).total();
}

Rgb render_camera(const Spectrum &radiance, const CameraModel &rgb_camera, double gain) {
    if (rgb_camera.channels() != 3)
        throw std::invalid_argument("render_camera: camera has " +
                                    std::to_string(rgb_camera.channels()) +
                                    " filters, an RGB camera needs 3");
    require_same_grid(radiance.grid(), rgb_camera.grid(), "render_camera");
    const Eigen::Vector3d v = gain * rgb_camera.responsivity().transpose() * radiance.values();
    return {v[0], v[1], v[2]};
}

Eigen::MatrixXd render_measurement(const SurfacePatch &surface, const ImagingSystem &system,
                                   const GainMatrix &gains) {
    if (gains.rows() != system.filters() || gains.cols() != system.lights())
        throw std::invalid_argument("render_measurement: gains are " + std::to_string(gains.rows()) +
                                    "x" + std::to_string(gains.cols()) + " but the system is " +
                                    std::to_string(system.filters()) + "x" +
                                    std::to_string(system.lights()));
    const auto &c = system.camera.responsivity();
    Eigen::MatrixXd out(system.filters(), system.lights());
    for (int j = 0; j < system.lights(); ++j) {
        const Spectrum radiance = relight(surface, system.illuminants.illuminants()[static_cast<std::size_t>(j)]);
        out.col(j) = (c.transpose() * radiance.values()).cwiseProduct(gains.values().col(j));
    }
    return out;
}

RgbImage::RgbImage(int width, int height)
    : RgbImage(width, height,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                   static_cast<std::size_t>(std::max(height, 0)) * 3)) {}

RgbImage::RgbImage(int width, int height, std::vector<double> values)
    : width_{width}, height_{height}, values_{std::move(values)} {
    if (width < 1 || height < 1)
        throw std::invalid_argument("RgbImage: dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw std::invalid_argument("RgbImage: " + std::to_string(values_.size()) +
                                    " values for a " + std::to_string(width) + "x" +
                                    std::to_string(height) + " image");
}

Rgb RgbImage::at(int x, int y) const {
    const auto k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(x)) * 3;
    return {values_.at(k), values_.at(k + 1), values_.at(k + 2)};
}

void RgbImage::set(int x, int y, const Rgb &rgb) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        throw std::out_of_range("RgbImage::set: pixel outside the image");
    const auto k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(x)) * 3;
    std::copy(rgb.begin(), rgb.end(), values_.begin() + static_cast<std::ptrdiff_t>(k));
}

RmseMap rgb_rmse_map(const RgbImage &predicted, const RgbImage &captured) {
    if (predicted.width() != captured.width() || predicted.height() != captured.height())
        throw std::invalid_argument(
            "rgb_rmse_map: predicted image is " + std::to_string(predicted.width()) + "x" +
            std::to_string(predicted.height()) + ", captured image is " +
            std::to_string(captured.width()) + "x" + std::to_string(captured.height()));
    auto in_range = [](const std::vector<double> &v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
    };
    if (!in_range(predicted.values()) || !in_range(captured.values()))
        throw std::invalid_argument("rgb_rmse_map: image values must lie in [0, 1]");
    RmseMap out{predicted.width(), predicted.height(), {}, 0.0};
    const auto &p = predicted.values();
    const auto &c = captured.values();
    out.values.resize(p.size() / 3);
    double total = 0.0;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        double ss = 0.0;
        for (std::size_t ch = 0; ch < 3; ++ch)
            ss += (p[3 * k + ch] - c[3 * k + ch]) * (p[3 * k + ch] - c[3 * k + ch]);
        out.values[k] = std::sqrt(ss / 3.0);
        total += out.values[k];
    }
    out.mean = total / static_cast<double>(out.values.size());
    return out;
}

std::string format_ppm(const RgbImage &image) {
    std::string out = "P6\n" + std::to_string(image.width()) + " " +
                      std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + image.values().size());
    for (double v : image.values())
        out.push_back(static_cast<char>(
            static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    return out;
}

RgbImage parse_ppm(const std::string &bytes, const std::string &source) {
    std::size_t pos = 0;
    int line = 1;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            const char ch = bytes[pos];
            if (ch == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                if (ch == '\n')
                    ++line;
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&](const char *what) {
        skip_space();
        int value = 0;
        const auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
        if (ec != std::errc{} || value <= 0)
            throw ParseError(source, line, 0, std::string{"expected a positive "} + what);
        pos = static_cast<std::size_t>(ptr - bytes.data());
        return value;
    };
    if (bytes.compare(0, 2, "P6") != 0)
        throw ParseError(source, 1, 1, "not a binary PPM (missing P6 magic)");
    pos = 2;
    const int width = read_int("width");
    const int height = read_int("height");
    const int maxval = read_int("maxval");
    if (maxval != 255)
        throw ParseError(source, line, 0, "only maxval 255 is supported, found " + std::to_string(maxval));
    if (pos >= bytes.size())
        throw ParseError(source, line, 0, "missing pixel data");
    ++pos; // single whitespace byte after maxval
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - pos < count)
        throw ParseError(source, line, 0, "truncated pixel data: expected " + std::to_string(count) +
                                               " bytes, found " + std::to_string(bytes.size() - pos));
    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k)
        values[k] = static_cast<unsigned char>(bytes[pos + k]) / 255.0;
    return {width, height, std::move(values)};
}

void write_ppm(const std::filesystem::path &path, const RgbImage &image) {
    write_text_file_atomic(path, format_ppm(image));
}

RgbImage read_ppm(const std::filesystem::path &path) {
    return parse_ppm(read_text_file(path), path.string());
}

std::string format_rgb_csv(const RgbImage &image) {
    std::string out = "x,y,r,g,b\n";
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const Rgb v = image.at(x, y);
            out += std::to_string(x) + "," + std::to_string(y) + "," + format_number(v[0]) + "," +
                   format_number(v[1]) + "," + format_number(v[2]) + "\n";
        }
    return out;
}

RgbImage parse_rgb_csv(const std::string &text, const std::string &source) {
    std::istringstream in{text};
    std::string row;
    int line = 0;
    struct Entry {
        int x, y;
        Rgb rgb;
    };
    std::vector<Entry> entries;
    int width = 0, height = 0;
    while (std::getline(in, row)) {
        ++line;
        if (!row.empty() && row.back() == '\r')
            row.pop_back();
        if (row.find_first_not_of(" \t") == std::string::npos)
            continue;
        if (line == 1) {
            if (row != "x,y,r,g,b")
                throw ParseError(source, 1, 1, "expected header 'x,y,r,g,b'");
            continue;
        }
        std::array<double, 5> cells{};
        std::size_t begin = 0;
        for (std::size_t c = 0; c < 5; ++c) {
            const auto end = c < 4 ? row.find(',', begin) : row.size();
            if (end == std::string::npos)
                throw ParseError(source, line, static_cast<int>(begin) + 1, "expected 5 columns");
            const auto [ptr, ec] = std::from_chars(row.data() + begin, row.data() + end, cells[c]);
            if (ec != std::errc{} || ptr != row.data() + end || !std::isfinite(cells[c]))
                throw ParseError(source, line, static_cast<int>(begin) + 1,
                                 "expected a number, found '" + row.substr(begin, end - begin) + "'");
            begin = end + 1;
        }
        if (cells[0] < 0 || cells[1] < 0 || cells[0] != std::floor(cells[0]) ||
            cells[1] != std::floor(cells[1]))
            throw ParseError(source, line, 1, "pixel coordinates must be nonnegative integers");
        const Entry e{static_cast<int>(cells[0]), static_cast<int>(cells[1]), {cells[2], cells[3], cells[4]}};
        width = std::max(width, e.x + 1);
        height = std::max(height, e.y + 1);
        entries.push_back(e);
    }
    if (line == 0)
        throw ParseError(source, 1, 1, "empty file");
    if (entries.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ParseError(source, 0, 0, "expected " + std::to_string(width * height) +
                                           " pixels for a " + std::to_string(width) + "x" +
                                           std::to_string(height) + " image, found " +
                                           std::to_string(entries.size()));
    RgbImage image{width, height};
    for (const auto &e : entries)
        image.set(e.x, e.y, e.rgb);
    return image;
}

} // namespace fluorsep
