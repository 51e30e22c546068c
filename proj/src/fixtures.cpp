#include <fluorsep/fixtures.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/spectral_csv.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fluorsep {

namespace {

Eigen::VectorXd gaussian(const Eigen::VectorXd &lambda, double centre, double sigma) {
    return (-0.5 * ((lambda.array() - centre) / sigma).square()).exp().matrix();
}

std::string indexed(const char *prefix, int k) {
    std::string s = std::to_string(k + 1);
    if (s.size() < 2)
        s.insert(0, "0");
    return prefix + s;
}

Eigen::MatrixXd stack(const std::vector<Spectrum> &spectra) {
    Eigen::MatrixXd out(spectra.front().size(), static_cast<Eigen::Index>(spectra.size()));
    for (std::size_t k = 0; k < spectra.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = spectra[k].values();
    return out;
}

} // namespace

SurfacePatch FixtureSet::patch(int k) const {
    if (k < 0 || k >= patch_count())
        throw std::out_of_range("FixtureSet::patch: index " + std::to_string(k) + " not in [0, " +
                                std::to_string(patch_count()) + ")");
    const Fluorophore f = fluorophores[static_cast<std::size_t>(k)];
    return {reflectances[static_cast<std::size_t>(k)],
            donaldson_from_fluorophores(std::span<const Fluorophore>{&f, 1})};
}

std::vector<Spectrum> FixtureSet::excitations() const {
    std::vector<Spectrum> out;
    for (const auto &f : fluorophores)
        out.push_back(f.excitation);
    return out;
}

std::vector<Spectrum> FixtureSet::emissions() const {
    std::vector<Spectrum> out;
    for (const auto &f : fluorophores)
        out.push_back(f.emission);
    return out;
}

BasisSet FixtureSet::derive_bases(int n_r, int n_x, int n_m) const {
    const auto ex = excitations();
    const auto em = emissions();
    return {derive_basis(reflectances, n_r, BasisFamily::reflectance),
            derive_basis(ex, n_x, BasisFamily::excitation),
            derive_basis(em, n_m, BasisFamily::emission)};
}

FixtureSet FixtureSet::resampled(const WavelengthGrid &target) const {
    FixtureSet out{patch_names, {}, fluorophore_names, {}};
    for (const auto &r : reflectances)
        out.reflectances.push_back(resample(r, target));
    for (const auto &f : fluorophores)
        out.fluorophores.push_back({resample(f.excitation, target), resample(f.emission, target)});
    return out;
}

FixtureSet generate_fixture_set(std::uint64_t seed, const WavelengthGrid &grid) {
    const Eigen::VectorXd lambda = grid.wavelengths();
    FixtureSet set;

    Rng rng{stream_seed(seed, "fixtures/reflectance")};
    auto uniform = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>{lo, hi}(rng);
    };
    for (int k = 0; k < kFixturePatches; ++k) {
        const double base = uniform(0.05, 0.3);
        const double step = uniform(-0.2, 0.6);
        const double edge = uniform(450.0, 700.0);
        const double width = uniform(20.0, 60.0);
        const double bump = uniform(-0.1, 0.3);
        const double bump_centre = uniform(420.0, 900.0);
        const double bump_sigma = uniform(40.0, 120.0);
        Eigen::VectorXd r =
            (base + step / (1.0 + (-(lambda.array() - edge) / width).exp())).matrix() +
            bump * gaussian(lambda, bump_centre, bump_sigma);
        r = r.cwiseMax(0.02).cwiseMin(0.95);
        set.patch_names.push_back(indexed("patch", k));
        set.reflectances.emplace_back(grid, std::move(r), SpectralRole::reflectance);
    }

    rng.seed(stream_seed(seed, "fixtures/fluorophore"));
    for (int k = 0; k < kFixtureFluorophores; ++k) {
        const double sx = uniform(15.0, 35.0);
        const double sm = uniform(15.0, 35.0);
        const double px = uniform(400.0, 800.0);
        const double min_shift = 1.5 * (sx + sm);
        const double pm = std::min(px + uniform(min_shift, min_shift + 80.0), 975.0);
        const double amplitude = uniform(0.004, 0.012);
        set.fluorophore_names.push_back(indexed("fluor", k));
        set.fluorophores.push_back(
            {Spectrum{grid, amplitude * gaussian(lambda, px, sx), SpectralRole::excitation},
             Spectrum{grid, gaussian(lambda, pm, sm), SpectralRole::emission}});
    }
    return set;
}

void write_fixture_set(const FixtureSet &set, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    write_spectral_csv(dir / "reflectance.csv", set.grid(), set.patch_names, stack(set.reflectances));
    write_spectral_csv(dir / "excitation.csv", set.grid(), set.fluorophore_names,
                       stack(set.excitations()));
    write_spectral_csv(dir / "emission.csv", set.grid(), set.fluorophore_names,
                       stack(set.emissions()));
}

FixtureSet load_fixture_set(const std::filesystem::path &dir, const WavelengthGrid &grid) {
    const auto refl = read_spectral_csv(dir / "reflectance.csv");
    const auto ex = read_spectral_csv(dir / "excitation.csv");
    const auto em = read_spectral_csv(dir / "emission.csv");
    if (ex.names != em.names)
        throw std::runtime_error("load_fixture_set: excitation.csv and emission.csv name different "
                                 "fluorophores");
    if (ex.columns() < refl.columns())
        throw std::runtime_error("load_fixture_set: fewer fluorophores than patches");
    FixtureSet set{refl.names, refl.spectra(grid, SpectralRole::reflectance), ex.names, {}};
    const auto xs = ex.spectra(grid, SpectralRole::excitation);
    const auto ms = em.spectra(grid, SpectralRole::emission);
    for (std::size_t k = 0; k < xs.size(); ++k)
        set.fluorophores.push_back({xs[k], ms[k]});
    return set;
}

} // namespace fluorsep
