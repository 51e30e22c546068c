#include "commands.hpp"

#include <fluorsep/spectral_csv.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using fluorsep::RunConfig;

/// Flag values as parsed; only flags that were given override the config.
struct Flags {
    std::string config;
    std::string system;
    std::string fixtures;
    std::vector<int> patches;
    std::string model;
    double alpha = 0;
    double beta = 0;
    double eta = 0;
    double rho = 0;
    int max_iterations = 0;
    int restarts = 0;
    int n_r = 0;
    int n_x = 0;
    int n_m = 0;
    std::uint64_t seed = 0;
    std::string out;
    double snr_db = 0;
    std::vector<std::string> measurements;
    std::string name;
    bool smoke = false;
    std::string estimate;
    std::string illuminants;
    std::string rgb_camera;
    double rgb_gain = 1;
    std::vector<std::string> bases;
};

void add_options(CLI::App &sub, Flags &f, const std::string &command) {
    sub.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub.add_option("--seed", f.seed, "root random seed");
    sub.add_option("--out", f.out, "output directory");
    sub.add_option("--fixtures", f.fixtures, "fixture directory");
    sub.add_option("--system", f.system, "system JSON");
    sub.add_option("--n-r", f.n_r, "reflectance basis size");
    sub.add_option("--n-x", f.n_x, "excitation basis size");
    sub.add_option("--n-m", f.n_m, "emission basis size");
    if (command == "simulate" || command == "basis")
        sub.add_option("--patches", f.patches, "1-based fixture patch numbers");
    if (command == "simulate")
        sub.add_option("--snr", f.snr_db, "add noise at this SNR in dB");
    if (command == "estimate" || command == "sweep") {
        sub.add_option("--alpha", f.alpha, "reflectance smoothness weight");
        sub.add_option("--beta", f.beta, "fluorescence smoothness weight");
        sub.add_option("--eta", f.eta, "nuclear norm weight");
        sub.add_option("--max-iterations", f.max_iterations, "iteration cap");
    }
    if (command == "estimate") {
        sub.add_option("--model", f.model, "multi, single or cim");
        sub.add_option("--rho", f.rho, "ADMM penalty");
        sub.add_option("--restarts", f.restarts, "extra random starts (single, cim)");
        sub.add_option("--bases", f.bases, "reflectance, excitation and emission basis CSVs")
            ->expected(3);
        sub.add_option("measurements", f.measurements, "measurement JSON files");
    }
    if (command == "sweep") {
        sub.add_option("--name", f.name, "bases, channels, noise or convergence");
        sub.add_flag("--smoke", f.smoke, "reduced problem size");
    }
    if (command == "relight") {
        sub.add_option("--estimate", f.estimate, "estimate JSON");
        sub.add_option("--illuminants", f.illuminants, "spectral CSV of novel illuminants");
        sub.add_option("--rgb-camera", f.rgb_camera, "spectral CSV with three filters");
        sub.add_option("--rgb-gain", f.rgb_gain, "RGB exposure gain");
    }
}

RunConfig build_config(const CLI::App &sub, const Flags &f) {
    RunConfig c = f.config.empty() ? RunConfig{} : fluorsep::load_run_config(f.config);
    auto given = [&](const char *flag) {
        const auto *opt = sub.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--seed"))
        c.seed = f.seed;
    if (given("--out"))
        c.out = f.out;
    if (given("--fixtures"))
        c.fixtures = f.fixtures;
    if (given("--system"))
        c.system = f.system;
    if (given("--n-r"))
        c.n_r = f.n_r;
    if (given("--n-x"))
        c.n_x = f.n_x;
    if (given("--n-m"))
        c.n_m = f.n_m;
    if (given("--patches"))
        c.patches = f.patches;
    if (given("--snr"))
        c.snr_db = f.snr_db;
    if (given("--alpha"))
        c.alpha = f.alpha;
    if (given("--beta"))
        c.beta = f.beta;
    if (given("--eta"))
        c.eta = f.eta;
    if (given("--max-iterations"))
        c.max_iterations = f.max_iterations;
    if (given("--model"))
        c.model = fluorsep::model_from_string(f.model);
    if (given("--rho"))
        c.rho = f.rho;
    if (given("--restarts"))
        c.restarts = f.restarts;
    if (given("--bases")) {
        c.reflectance_basis = f.bases[0];
        c.excitation_basis = f.bases[1];
        c.emission_basis = f.bases[2];
    }
    if (given("measurements"))
        c.measurements.assign(f.measurements.begin(), f.measurements.end());
    if (given("--name"))
        c.sweep = f.name;
    if (given("--smoke"))
        c.smoke = f.smoke;
    if (given("--estimate"))
        c.estimate = f.estimate;
    if (given("--illuminants"))
        c.relight_illuminants = f.illuminants;
    if (given("--rgb-camera"))
        c.rgb_camera = f.rgb_camera;
    if (given("--rgb-gain"))
        c.rgb_gain = f.rgb_gain;
    return c;
}

void report(const std::string &command, const std::exception &e, const std::filesystem::path &out) {
    const std::string line = fluorsep::cli::error_json(command, e);
    std::cerr << line << '\n';
    if (out.empty())
        return;
    try {
        std::filesystem::create_directories(out);
        fluorsep::write_text_file_atomic(out / "error.json", line + "\n");
    } catch (const std::exception &) {
        // stderr already carries the report
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Reflectance and fluorescence separation toolkit"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "render measurements of fixture patches"},
        {"estimate", "recover reflectance and fluorescence from measurements"},
        {"sweep", "run a parameter sweep and write its CSV"},
        {"relight", "predict radiance and RGB under novel illuminants"},
        {"basis", "derive basis functions from the fixtures"},
    };
    for (const auto &[name, help] : commands)
        add_options(*app.add_subcommand(name, help), flags, name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::Error &e) {
        const std::string command = app.get_subcommands().empty()
                                        ? std::string{}
                                        : app.get_subcommands().front()->get_name();
        std::cerr << fluorsep::cli::error_json(command, std::invalid_argument{e.what()}) << '\n';
        return 2;
    }

    const CLI::App &sub = *app.get_subcommands().front();
    const std::string command = sub.get_name();
    std::filesystem::path out = flags.out;
    try {
        const RunConfig config = build_config(sub, flags);
        out = config.out;
        fluorsep::cli::run_command(command, config);
    } catch (const std::exception &e) {
        report(command, e, out);
        return 1;
    }
    return 0;
}
