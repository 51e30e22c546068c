#pragma once

#include <fluorsep/forward.hpp>
#include <fluorsep/spectral.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fluorsep {

/// Synthetic evaluation dataset: smooth reflectances paired with
/// Gaussian-shaped single fluorophores. Patch k combines reflectance k with
/// fluorophore k; the remaining fluorophores only enter basis derivation.
struct FixtureSet {
    std::vector<std::string> patch_names;
    std::vector<Spectrum> reflectances;
    std::vector<std::string> fluorophore_names;
    std::vector<Fluorophore> fluorophores;

    const WavelengthGrid &grid() const { return reflectances.front().grid(); }
    int patch_count() const { return static_cast<int>(reflectances.size()); }

    SurfacePatch patch(int k) const;
    std::vector<Spectrum> excitations() const;
    std::vector<Spectrum> emissions() const;

    /// Bases derived from this set: reflectance from the patch
    /// reflectances, excitation/emission from all fluorophores.
    BasisSet derive_bases(int n_r, int n_x, int n_m) const;

    /// Same data interpolated onto another grid.
    FixtureSet resampled(const WavelengthGrid &grid) const;
};

inline constexpr int kFixturePatches = 24;
inline constexpr int kFixtureFluorophores = 48;

/// Deterministic generator used to produce the shipped CSV files.
FixtureSet generate_fixture_set(std::uint64_t seed, const WavelengthGrid &grid = WavelengthGrid::standard());

/// Writes reflectance.csv, excitation.csv and emission.csv into `dir`.
void write_fixture_set(const FixtureSet &set, const std::filesystem::path &dir);

/// Reads the three CSV files from `dir` and interpolates them onto `grid`.
FixtureSet load_fixture_set(const std::filesystem::path &dir, const WavelengthGrid &grid = WavelengthGrid::standard());

} // namespace fluorsep
