#include "commands.hpp"

#include <fluorsep/estimate_io.hpp>
#include <fluorsep/fixtures.hpp>
#include <fluorsep/parallel.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/relight.hpp>
#include <fluorsep/spectral_csv.hpp>
#include <fluorsep/sweeps.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>
#include <variant>

namespace fluorsep::cli {

using nlohmann::json;

namespace {

/// Collects relative output paths for the manifest. Only the calling
/// thread writes; workers hand back results by slot.
class Outputs {
public:
    explicit Outputs(std::filesystem::path root) : root_{std::move(root)} {
        std::filesystem::create_directories(root_);
    }
    const std::filesystem::path &root() const { return root_; }
    std::filesystem::path add(const std::filesystem::path &relative) {
        files_.insert(relative.generic_string());
        return root_ / relative;
    }
    void write(const std::filesystem::path &relative, const std::string &text) {
        const auto path = add(relative);
        std::filesystem::create_directories(path.parent_path());
        write_text_file_atomic(path, text);
    }
    json list() const { return json(std::vector<std::string>(files_.begin(), files_.end())); }

private:
    std::filesystem::path root_;
    std::set<std::string> files_;
};

void write_manifest(const Outputs &out, const std::string &command, const RunConfig &config,
                    json summary) {
    json manifest = {{"format", "fluorsep.manifest"},
                     {"command", command},
                     {"config", json::parse(run_config_json(config))},
                     {"outputs", out.list()},
                     {"summary", std::move(summary)}};
    write_text_file_atomic(out.root() / "manifest.json", manifest.dump(2) + "\n");
}

std::filesystem::path fixtures_dir(const RunConfig &c) {
    return c.fixtures.empty() ? default_fixtures_dir() : c.fixtures;
}

SystemFile system_for(const RunConfig &c) {
    if (!c.system.empty())
        return load_system(c.system);
    SystemFile out;
    out.system =
        std::make_shared<const ImagingSystem>(make_bispectral_system(WavelengthGrid::standard()));
    return out;
}

std::vector<int> selected_patches(const RunConfig &c, const FixtureSet &fixtures) {
    std::vector<int> out;
    if (c.patches.empty()) {
        for (int k = 0; k < fixtures.patch_count(); ++k)
            out.push_back(k);
        return out;
    }
    for (int p : c.patches) {
        if (p < 1 || p > fixtures.patch_count())
            throw std::invalid_argument("patch " + std::to_string(p) + " is out of range [1, " +
                                        std::to_string(fixtures.patch_count()) + "]");
        out.push_back(p - 1);
    }
    return out;
}

BasisSet bases_for(const RunConfig &c, const WavelengthGrid &grid) {
    const bool any = !c.reflectance_basis.empty() || !c.excitation_basis.empty() ||
                     !c.emission_basis.empty();
    if (any) {
        if (c.reflectance_basis.empty() || c.excitation_basis.empty() || c.emission_basis.empty())
            throw std::invalid_argument("basis files: reflectance, excitation and emission must "
                                        "all be given");
        return load_bases(c.reflectance_basis, c.excitation_basis, c.emission_basis, grid);
    }
    return load_fixture_set(fixtures_dir(c), grid).derive_bases(c.n_r, c.n_x, c.n_m);
}

template <class Tuning>
void apply_biconvex_overrides(Tuning &t, const RunConfig &c) {
    if (c.alpha)
        t.alpha = *c.alpha;
    if (c.beta)
        t.beta = *c.beta;
    if (c.max_iterations)
        t.max_outer_iterations = *c.max_iterations;
    t.restarts = c.restarts;
}

} // namespace

std::filesystem::path default_fixtures_dir() {
    return std::filesystem::path{FLUORSEP_DATA_DIR} / "fixtures";
}

void simulate(const RunConfig &config) {
    const auto sys = system_for(config);
    const auto fixtures = load_fixture_set(fixtures_dir(config), sys.system->grid());
    const auto patches = selected_patches(config, fixtures);

    std::vector<std::optional<MeasurementGrid>> results(patches.size());
    parallel_for(patches.size(), [&](std::size_t s) {
        const int k = patches[s];
        const auto patch = fixtures.patch(k);
        auto m = fluorsep::simulate(patch, sys.system, sys.gains.resolve(patch, *sys.system));
        if (config.snr_db)
            m = add_noise(m, *config.snr_db,
                          stream_seed(config.seed, "simulate/noise", static_cast<std::uint64_t>(k)));
        results[s] = std::move(m);
    });

    Outputs out{config.out};
    write_system(out.root() / "system", *sys.system);
    for (const char *f : {"system.json", "qe.csv", "filters.csv", "illuminants.csv"})
        out.add(std::filesystem::path{"system"} / f);

    json summary = json::array();
    const auto &grid = sys.system->grid();
    for (std::size_t s = 0; s < patches.size(); ++s) {
        const int k = patches[s];
        const auto &name = fixtures.patch_names[static_cast<std::size_t>(k)];
        const auto rel = std::filesystem::path{"measurements"} / (name + ".json");
        write_measurement(out.add(rel), name, *results[s], "../system/system.json");

        const auto &fl = fixtures.fluorophores[static_cast<std::size_t>(k)];
        Eigen::MatrixXd truth(grid.size(), 3);
        truth << fixtures.reflectances[static_cast<std::size_t>(k)].values(),
            fl.excitation.values(), fl.emission.values();
        out.write(std::filesystem::path{"truth"} / (name + ".csv"),
                  format_spectral_csv(grid, {"reflectance", "excitation", "emission"}, truth));
        summary.push_back({{"name", name},
                           {"patch", k + 1},
                           {"max_pixel", results[s]->values().maxCoeff()}});
    }
    write_manifest(out, "simulate", config, {{"measurements", summary}});
}

void estimate(const RunConfig &config) {
    if (config.measurements.empty())
        throw std::invalid_argument("estimate: no measurement files (pass them as arguments or "
                                    "set \"measurements\" in the config)");
    std::vector<NamedMeasurement> inputs;
    std::set<std::string> names;
    for (const auto &p : config.measurements) {
        inputs.push_back(load_measurement(p));
        if (!names.insert(inputs.back().name).second)
            throw std::invalid_argument("estimate: duplicate measurement name \"" +
                                        inputs.back().name + "\"");
    }

    std::vector<std::optional<EstimateRecord>> records(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t k) {
        const auto &[name, m] = inputs[k];
        const BasisSet bases = bases_for(config, m.grid());
        switch (config.model) {
        case Model::multi: {
            MultiTuning t;
            if (config.alpha)
                t.alpha = *config.alpha;
            if (config.beta)
                t.beta = *config.beta;
            if (config.eta)
                t.eta = *config.eta;
            if (config.rho)
                t.rho = *config.rho;
            if (config.max_iterations)
                t.max_iterations = *config.max_iterations;
            records[k] = make_record(name, estimate_multi(m, bases, t), m);
            break;
        }
        case Model::single: {
            SingleTuning t;
            apply_biconvex_overrides(t, config);
            t.seed = stream_seed(config.seed, "estimate/" + name);
            records[k] = make_record(name, estimate_single(m, bases, t), m);
            break;
        }
        case Model::cim: {
            CimTuning t;
            apply_biconvex_overrides(t, config);
            t.seed = stream_seed(config.seed, "estimate/" + name);
            records[k] = make_record(name, estimate_cim(m, bases, t), m);
            break;
        }
        }
    });

    Outputs out{config.out};
    json summary = json::array();
    for (const auto &r : records) {
        write_estimate(out.root(), *r);
        out.add(std::filesystem::path{"estimates"} / (r->name + ".json"));
        out.add(std::filesystem::path{"spectra"} / (r->name + ".csv"));
        if (r->donaldson)
            out.add(std::filesystem::path{"spectra"} / (r->name + "_donaldson.csv"));
        if (r->model == Model::cim)
            out.add(std::filesystem::path{"spectra"} / (r->name + "_p.csv"));
        summary.push_back({{"name", r->name},
                           {"pixel_rmse", r->pixel_rmse},
                           {"iterations", r->iterations},
                           {"converged", r->converged},
                           {"degenerate", r->degenerate}});
    }
    write_manifest(out, "estimate", config, {{"estimates", summary}});
}

void sweep(const RunConfig &config) {
    if (config.sweep.empty())
        throw std::invalid_argument("sweep: no sweep name (use --name or \"sweep\" in the config)");
    SweepPlan plan = sweep_plan(config.sweep, config.smoke);
    auto &o = plan.options;
    if (config.alpha)
        o.alpha = *config.alpha;
    if (config.beta)
        o.beta = *config.beta;
    if (config.eta)
        o.eta = *config.eta;
    if (config.max_iterations)
        o.max_iterations = *config.max_iterations;
    o.seed = config.seed;
    const auto fixtures = load_fixture_set(fixtures_dir(config), o.grid);
    const SweepResult result = run_sweep(fixtures, plan);

    Outputs out{config.out};
    out.write(std::filesystem::path{"sweeps"} / (result.name + ".csv"), format_sweep_csv(result));
    json flags = json::object();
    for (const auto &[k, v] : result.flags)
        flags[k] = v;
    write_manifest(out, "sweep", config,
                   {{"sweep", result.name},
                    {"smoke", config.smoke},
                    {"grid_bins", o.grid.size()},
                    {"patches", o.patch_count},
                    {"rows", result.points.size()},
                    {"flags", flags}});
}

void relight(const RunConfig &config) {
    if (config.estimate.empty())
        throw std::invalid_argument("relight: no estimate file (use --estimate)");
    if (config.relight_illuminants.empty())
        throw std::invalid_argument("relight: no illuminant file (use --illuminants)");
    const EstimateRecord record = load_estimate(config.estimate);
    const SurfacePatch surface = record.surface();
    const auto &grid = surface.reflectance.grid();
    const auto table = read_spectral_csv(config.relight_illuminants);
    const auto lights = table.spectra(grid, SpectralRole::illuminant);

    Eigen::MatrixXd radiance(grid.size(), static_cast<Eigen::Index>(lights.size()));
    for (std::size_t k = 0; k < lights.size(); ++k)
        radiance.col(static_cast<Eigen::Index>(k)) = fluorsep::relight(surface, lights[k]).values();

    Outputs out{config.out};
    out.write(std::filesystem::path{"spectra"} / (record.name + "_relit.csv"),
              format_spectral_csv(grid, table.names, radiance));
    json summary = {{"estimate", record.name}, {"illuminants", table.names}};
    if (!config.rgb_camera.empty()) {
        const auto cam_table = read_spectral_csv(config.rgb_camera);
        if (cam_table.columns() != 3)
            throw std::invalid_argument("relight: RGB camera file has " +
                                        std::to_string(cam_table.columns()) +
                                        " filters, expected 3");
        const CameraModel camera{Spectrum{grid, Eigen::VectorXd::Ones(grid.size()),
                                          SpectralRole::filter},
                                 cam_table.spectra(grid, SpectralRole::filter), cam_table.names};
        RgbImage image{static_cast<int>(lights.size()), 1};
        for (std::size_t k = 0; k < lights.size(); ++k)
            image.set(static_cast<int>(k), 0,
                      render_camera(Spectrum{grid, radiance.col(static_cast<Eigen::Index>(k))},
                                    camera, config.rgb_gain));
        out.write(std::filesystem::path{"relight"} / (record.name + "_rgb.csv"),
                  format_rgb_csv(image));
        out.write(std::filesystem::path{"relight"} / (record.name + ".ppm"), format_ppm(image));
        summary["rgb_gain"] = config.rgb_gain;
    }
    write_manifest(out, "relight", config, summary);
}

void basis(const RunConfig &config) {
    const WavelengthGrid grid =
        config.system.empty() ? WavelengthGrid::standard() : load_system(config.system).system->grid();
    const auto fixtures = load_fixture_set(fixtures_dir(config), grid);
    const BasisSet bases = fixtures.derive_bases(config.n_r, config.n_x, config.n_m);

    Outputs out{config.out};
    write_bases(out.root() / "bases", bases);
    for (const char *f : {"reflectance_basis.csv", "excitation_basis.csv", "emission_basis.csv"})
        out.add(std::filesystem::path{"bases"} / f);
    const auto excitations = fixtures.excitations();
    const auto emissions = fixtures.emissions();
    write_manifest(out, "basis", config,
                   {{"variance_explained",
                     {{"reflectance", variance_explained(bases.reflectance, fixtures.reflectances)},
                      {"excitation", variance_explained(bases.excitation, excitations)},
                      {"emission", variance_explained(bases.emission, emissions)}}}});
}

void run_command(const std::string &command, const RunConfig &config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    if (command == "simulate")
        simulate(config);
    else if (command == "estimate")
        estimate(config);
    else if (command == "sweep")
        sweep(config);
    else if (command == "relight")
        relight(config);
    else if (command == "basis")
        basis(config);
    else
        throw std::invalid_argument("unknown command \"" + command + "\"");
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json timings = {{"command", command}, {"wall_seconds", seconds}, {"threads", worker_count()}};
    write_text_file_atomic(config.out / "timings.json", timings.dump(2) + "\n");
    std::filesystem::remove(config.out / "error.json");
}

std::string error_json(const std::string &command, const std::exception &e) {
    json j = {{"command", command}, {"message", e.what()}};
    if (const auto *p = dynamic_cast<const ParseError *>(&e)) {
        j["error"] = "parse_error";
        j["file"] = p->file();
        j["line"] = p->line();
        j["column"] = p->column();
        j["message"] = p->detail();
    } else if (dynamic_cast<const std::invalid_argument *>(&e)) {
        j["error"] = "invalid_argument";
    } else {
        j["error"] = "runtime_error";
    }
    return j.dump();
}

} // namespace fluorsep::cli
