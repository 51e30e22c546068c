#include <fluorsep/fixtures.hpp>
#include <fluorsep/spectral_csv.hpp>

#include <doctest.h>

#include <filesystem>

using namespace fluorsep;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path{FLUORSEP_DATA_DIR} / "fixtures";

} // namespace

TEST_CASE("shipped fixtures match the generator") {
    const auto shipped = load_fixture_set(kFixtures);
    const auto generated = generate_fixture_set(1);
    REQUIRE(shipped.patch_count() == kFixturePatches);
    REQUIRE(shipped.fluorophores.size() == static_cast<std::size_t>(kFixtureFluorophores));
    CHECK(shipped.patch_names == generated.patch_names);
    CHECK(shipped.fluorophore_names == generated.fluorophore_names);
    double worst = 0.0;
    for (int k = 0; k < kFixturePatches; ++k) {
        const auto s = shipped.patch(k);
        const auto g = generated.patch(k);
        worst = std::max(worst, (s.reflectance.values() - g.reflectance.values()).cwiseAbs().maxCoeff());
        worst = std::max(worst, (s.donaldson.entries() - g.donaldson.entries()).cwiseAbs().maxCoeff());
    }
    // the CSV files hold shortest round-trip decimal text
    CHECK(worst == 0.0);
}

TEST_CASE("fixture spectra are physically valid") {
    const auto set = load_fixture_set(kFixtures);
    for (const auto &r : set.reflectances) {
        CHECK(r.values().minCoeff() >= 0.0);
        CHECK(r.values().maxCoeff() <= 1.0);
    }
    for (const auto &f : set.fluorophores) {
        CHECK(f.excitation.values().minCoeff() >= 0.0);
        CHECK(f.emission.values().minCoeff() >= 0.0);
    }
}

TEST_CASE("derived bases explain the fixture spectra") {
    const auto set = load_fixture_set(kFixtures);
    const auto bases = set.derive_bases(5, 12, 12);
    CHECK(variance_explained(bases.reflectance, set.reflectances) >= 0.99);
    CHECK(variance_explained(bases.excitation, set.excitations()) >= 0.97);
    CHECK(variance_explained(bases.emission, set.emissions()) >= 0.97);
}

TEST_CASE("fixture files round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "fluorsep_test_fixtures";
    std::filesystem::remove_all(dir);
    const auto grid = WavelengthGrid::spanning(380.0, 1000.0, 40);
    const auto set = generate_fixture_set(5, grid);
    write_fixture_set(set, dir);
    const auto back = load_fixture_set(dir, grid);
    CHECK(back.patch_names == set.patch_names);
    CHECK((back.reflectances[3].values() - set.reflectances[3].values()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(generate_fixture_set(5, grid).reflectances[0].values() == set.reflectances[0].values());
    CHECK(generate_fixture_set(6, grid).reflectances[0].values() != set.reflectances[0].values());
    std::filesystem::remove_all(dir);
}
