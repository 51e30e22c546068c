// Regenerates the shipped synthetic data under data/:
//   fixtures/{reflectance,excitation,emission}.csv
//   systems/experimental/{system.json,qe.csv,filters.csv,illuminants.csv}
//   cameras/rgb.csv
// Usage: make_data <data dir> [seed]

#include <fluorsep/fixtures.hpp>
#include <fluorsep/forward.hpp>
#include <fluorsep/spectral_csv.hpp>
#include <fluorsep/system_io.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

namespace {

using namespace fluorsep;

Eigen::VectorXd gaussian(const WavelengthGrid &grid, double centre, double fwhm) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const Eigen::ArrayXd z = (grid.wavelengths().array() - centre) / sigma;
    return (-0.5 * z.square()).exp().matrix();
}

// Silicon-like sensor, 8 broad filters and 14 narrowband LEDs.
ImagingSystem experimental_system(const WavelengthGrid &grid) {
    Eigen::VectorXd qe = 0.9 * gaussian(grid, 650.0, 520.0);
    Spectrum q{grid, qe, SpectralRole::filter};

    std::vector<Spectrum> filters;
    std::vector<std::string> filter_names;
    for (int k = 0; k < 8; ++k) {
        const double centre = 420.0 + 75.0 * k;
        filters.emplace_back(grid, 0.95 * gaussian(grid, centre, 90.0), SpectralRole::filter);
        filter_names.push_back("filter" + std::to_string(static_cast<int>(centre)));
    }
    std::vector<Spectrum> leds;
    std::vector<std::string> led_names;
    for (int k = 0; k < 14; ++k) {
        const double centre = 400.0 + 40.0 * k;
        leds.emplace_back(grid, gaussian(grid, centre, 25.0 + 0.03 * (centre - 400.0)),
                          SpectralRole::illuminant);
        led_names.push_back("led" + std::to_string(static_cast<int>(centre)));
    }
    return {CameraModel{std::move(q), std::move(filters), std::move(filter_names)},
            IlluminantSet{std::move(leds), std::move(led_names)}};
}

} // namespace

int main(int argc, char **argv) {
    if (argc < 2 || argc > 3) {
        std::cerr << "usage: make_data <data dir> [seed]\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    const std::uint64_t seed = argc == 3 ? std::strtoull(argv[2], nullptr, 10) : 1;
    try {
        const auto grid = WavelengthGrid::standard();
        write_fixture_set(generate_fixture_set(seed, grid), dir / "fixtures");
        write_system(dir / "systems" / "experimental", experimental_system(grid));
        Eigen::MatrixXd rgb(grid.size(), 3);
        rgb << 0.9 * gaussian(grid, 600.0, 90.0), 0.9 * gaussian(grid, 540.0, 90.0),
            0.9 * gaussian(grid, 460.0, 80.0);
        std::filesystem::create_directories(dir / "cameras");
        write_spectral_csv(dir / "cameras" / "rgb.csv", grid, {"r", "g", "b"}, rgb);
    } catch (const std::exception &e) {
        std::cerr << "make_data: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
