#include <fluorsep/spectral_csv.hpp>
#include <fluorsep/system_io.hpp>

#include "json_util.hpp"

#include <cmath>
#include <stdexcept>

namespace fluorsep {

using detail::json;

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

WavelengthGrid parse_grid(const json &j, const std::string &source) {
    detail::require_keys(j, {"start_nm", "step_nm", "first_nm", "last_nm", "count"}, source, "grid");
    const int count = detail::get_int(j, "count", source);
    if (j.contains("first_nm") || j.contains("last_nm"))
        return WavelengthGrid::spanning(detail::get_number(j, "first_nm", source),
                                        detail::get_number(j, "last_nm", source), count);
    return {detail::get_number(j, "start_nm", source), detail::get_number(j, "step_nm", source),
            count};
}

json grid_json(const WavelengthGrid &g) {
    return {{"start_nm", g.start()}, {"step_nm", g.step()}, {"count", g.size()}};
}

GainSpec parse_gains(const json &j, const std::string &source) {
    GainSpec spec;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "auto_max_one")
            spec.kind = GainSpec::Kind::max_one;
        else if (s == "auto_max_one_per_filter")
            spec.kind = GainSpec::Kind::max_one_per_filter;
        else
            detail::schema_error(source, "unknown gains mode \"" + s +
                                             "\" (expected auto_max_one, auto_max_one_per_filter, "
                                             "a number or a matrix)");
    } else if (j.is_number()) {
        spec.kind = GainSpec::Kind::fixed;
        spec.values = Eigen::MatrixXd::Constant(1, 1, j.get<double>());
    } else {
        spec.kind = GainSpec::Kind::fixed;
        spec.values = detail::get_matrix(j, source, "gains");
    }
    if (spec.kind == GainSpec::Kind::fixed && !(spec.values.minCoeff() > 0))
        detail::schema_error(source, "gains must be strictly positive");
    return spec;
}

std::vector<std::string> string_list(const json &j, const char *key, const std::string &source) {
    if (!j.contains(key))
        return {};
    const auto &v = j.at(key);
    if (!v.is_array())
        detail::schema_error(source, std::string{"\""} + key + "\" must be an array of strings");
    std::vector<std::string> out;
    for (const auto &e : v) {
        if (!e.is_string())
            detail::schema_error(source, std::string{"\""} + key + "\" must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

json string_list_json(const std::vector<std::string> &v) {
    json out = json::array();
    for (const auto &s : v)
        out.push_back(s);
    return out;
}

} // namespace

GainMatrix GainSpec::resolve(const SurfacePatch &patch, const ImagingSystem &system) const {
    switch (kind) {
    case Kind::max_one:
        return calibrate_gain_max_one(patch, system, GainMode::uniform);
    case Kind::max_one_per_filter:
        return calibrate_gain_max_one(patch, system, GainMode::per_filter);
    case Kind::fixed:
        break;
    }
    if (values.rows() == 1 && values.cols() == 1)
        return GainMatrix::uniform(system.filters(), system.lights(), values(0, 0));
    if (values.rows() != system.filters() || values.cols() != system.lights())
        throw std::invalid_argument("gains are " + shape(values.rows(), values.cols()) +
                                    " but the system has " +
                                    shape(system.filters(), system.lights()) +
                                    " filters x illuminants");
    return GainMatrix{values};
}

SystemFile parse_system(const std::string &json_text, const std::filesystem::path &base_dir,
                        const std::string &source) {
    const json j = detail::parse_json(json_text, source);
    detail::require_keys(j, {"format", "grid", "generator", "camera", "illuminants", "gains"},
                         source, "system");
    if (j.contains("format") && j.at("format") != "fluorsep.system")
        detail::schema_error(source, "\"format\" must be \"fluorsep.system\"");
    const WavelengthGrid grid =
        j.contains("grid") ? parse_grid(j.at("grid"), source) : WavelengthGrid::standard();

    SystemFile out;
    if (j.contains("gains"))
        out.gains = parse_gains(j.at("gains"), source);

    if (j.contains("generator")) {
        if (j.contains("camera") || j.contains("illuminants"))
            detail::schema_error(source, "\"generator\" cannot be combined with \"camera\" or "
                                         "\"illuminants\"");
        const auto &g = j.at("generator");
        detail::require_keys(g, {"type", "filters", "illuminants"}, source, "generator");
        const auto type = detail::get_string(g, "type", source);
        if (type == "bispectral")
            out.system = std::make_shared<const ImagingSystem>(make_bispectral_system(grid));
        else if (type == "rect")
            out.system = std::make_shared<const ImagingSystem>(make_rect_system(
                detail::get_int(g, "filters", source), detail::get_int(g, "illuminants", source),
                grid));
        else
            detail::schema_error(source, "unknown generator type \"" + type +
                                             "\" (expected rect or bispectral)");
        return out;
    }

    if (!j.contains("camera") || !j.contains("illuminants"))
        detail::schema_error(source, "system needs either \"generator\" or both \"camera\" and "
                                     "\"illuminants\"");
    const auto &cam = j.at("camera");
    detail::require_keys(cam, {"quantum_efficiency", "filters"}, source, "camera");
    Spectrum qe{grid, Eigen::VectorXd::Ones(grid.size()), SpectralRole::filter};
    if (cam.contains("quantum_efficiency")) {
        const auto table = read_spectral_csv(
            detail::resolve_path(base_dir, detail::get_string(cam, "quantum_efficiency", source)));
        if (table.columns() != 1)
            throw std::invalid_argument("quantum efficiency file has " +
                                        std::to_string(table.columns()) +
                                        " spectra, expected 1");
        qe = table.spectrum(0, grid, SpectralRole::filter);
    }
    const auto filters = read_spectral_csv(
        detail::resolve_path(base_dir, detail::get_string(cam, "filters", source)));
    if (!j.at("illuminants").is_string())
        detail::schema_error(source, "\"illuminants\" must be a CSV path");
    const auto lights =
        read_spectral_csv(detail::resolve_path(base_dir, j.at("illuminants").get<std::string>()));
    out.system = std::make_shared<const ImagingSystem>(
        CameraModel{std::move(qe), filters.spectra(grid, SpectralRole::filter), filters.names},
        IlluminantSet{lights.spectra(grid, SpectralRole::illuminant), lights.names});
    return out;
}

SystemFile load_system(const std::filesystem::path &path) {
    return parse_system(read_text_file(path), path.parent_path(), path.string());
}

void write_system(const std::filesystem::path &dir, const ImagingSystem &system) {
    std::filesystem::create_directories(dir);
    const auto &grid = system.grid();
    write_spectral_csv(dir / "qe.csv", grid, {"qe"}, system.camera.quantum_efficiency().values());
    Eigen::MatrixXd filters(grid.size(), system.filters());
    for (int k = 0; k < system.filters(); ++k)
        filters.col(k) = system.camera.filters()[static_cast<std::size_t>(k)].values();
    write_spectral_csv(dir / "filters.csv", grid, system.camera.names(), filters);
    write_spectral_csv(dir / "illuminants.csv", grid, system.illuminants.names(),
                       system.illuminants.matrix());
    const json j = {{"format", "fluorsep.system"},
                    {"grid", grid_json(grid)},
                    {"camera", {{"quantum_efficiency", "qe.csv"}, {"filters", "filters.csv"}}},
                    {"illuminants", "illuminants.csv"}};
    write_text_file_atomic(dir / "system.json", detail::dump(j));
}

LinearBasis orthonormalized(const WavelengthGrid &grid, const Eigen::MatrixXd &columns,
                            BasisFamily family) {
    const auto d = columns.rows();
    const auto k = columns.cols();
    if (d != grid.size() || k < 1 || k > d)
        throw std::invalid_argument("orthonormalized: basis is " + shape(d, k) + " on a " +
                                    std::to_string(grid.size()) + "-bin grid");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(columns);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const double scale = r.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < k; ++c)
        if (!(std::abs(r(c, c)) > 1e-10 * scale))
            throw std::invalid_argument(std::string{"orthonormalized: "} +
                                        std::string{to_string(family)} + " basis column " +
                                        std::to_string(c + 1) + " is linearly dependent");
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    for (Eigen::Index c = 0; c < k; ++c)
        if (q.col(c).dot(columns.col(c)) < 0)
            q.col(c) = -q.col(c);
    return {grid, std::move(q), family};
}

namespace {

LinearBasis load_basis(const std::filesystem::path &path, const WavelengthGrid &grid,
                       BasisFamily family) {
    const auto table = read_spectral_csv(path);
    Eigen::MatrixXd cols(grid.size(), table.columns());
    for (int c = 0; c < table.columns(); ++c)
        cols.col(c) = table.spectrum(c, grid).values();
    return orthonormalized(grid, cols, family);
}

std::vector<std::string> basis_names(const char *prefix, int k) {
    std::vector<std::string> out;
    for (int c = 0; c < k; ++c)
        out.push_back(prefix + std::to_string(c + 1));
    return out;
}

} // namespace

BasisSet load_bases(const std::filesystem::path &reflectance, const std::filesystem::path &excitation,
                    const std::filesystem::path &emission, const WavelengthGrid &grid) {
    return {load_basis(reflectance, grid, BasisFamily::reflectance),
            load_basis(excitation, grid, BasisFamily::excitation),
            load_basis(emission, grid, BasisFamily::emission)};
}

void write_bases(const std::filesystem::path &dir, const BasisSet &bases) {
    std::filesystem::create_directories(dir);
    const auto &grid = bases.grid();
    write_spectral_csv(dir / "reflectance_basis.csv", grid,
                       basis_names("r", bases.reflectance.size()), bases.reflectance.functions());
    write_spectral_csv(dir / "excitation_basis.csv", grid,
                       basis_names("x", bases.excitation.size()), bases.excitation.functions());
    write_spectral_csv(dir / "emission_basis.csv", grid, basis_names("m", bases.emission.size()),
                       bases.emission.functions());
}

NamedMeasurement load_measurement(const std::filesystem::path &path) {
    const std::string source = path.string();
    const json j = detail::parse_json(read_text_file(path), source);
    detail::require_keys(j, {"format", "name", "system", "filters", "illuminants", "values", "gains"},
                         source, "measurement");
    if (detail::get_string(j, "format", source) != "fluorsep.measurement")
        detail::schema_error(source, "\"format\" must be \"fluorsep.measurement\"");
    const auto system_path = detail::resolve_path(path.parent_path(), detail::get_string(j, "system", source));
    auto system = load_system(system_path).system;

    Eigen::MatrixXd values = detail::get_matrix(j.at("values"), source, "values");
    if (values.rows() != system->filters() || values.cols() != system->lights())
        throw ParseError(source, 0, 0,
                         "values are " + shape(values.rows(), values.cols()) + " but " +
                             system_path.string() + " has " +
                             shape(system->filters(), system->lights()) +
                             " filters x illuminants");
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(values.rows(), values.cols());
    if (j.contains("gains")) {
        const GainSpec spec = parse_gains(j.at("gains"), source);
        if (spec.kind != GainSpec::Kind::fixed)
            detail::schema_error(source, "measurement gains must be a number or a matrix");
        gains = spec.values.size() == 1
                    ? Eigen::MatrixXd::Constant(values.rows(), values.cols(), spec.values(0, 0))
                    : spec.values;
        if (gains.rows() != values.rows() || gains.cols() != values.cols())
            throw ParseError(source, 0, 0,
                             "gains are " + shape(gains.rows(), gains.cols()) +
                                 " but values are " + shape(values.rows(), values.cols()));
    }
    const auto filters = string_list(j, "filters", source);
    const auto lights = string_list(j, "illuminants", source);
    if (!filters.empty() && filters != system->camera.names())
        detail::schema_error(source, "filter names do not match " + system_path.string());
    if (!lights.empty() && lights != system->illuminants.names())
        detail::schema_error(source, "illuminant names do not match " + system_path.string());

    std::string name = j.contains("name") ? detail::get_string(j, "name", source)
                                          : path.stem().string();
    return {std::move(name),
            MeasurementGrid{std::move(values), std::move(system), GainMatrix{std::move(gains)}}};
}

void write_measurement(const std::filesystem::path &path, const std::string &name,
                       const MeasurementGrid &m, const std::string &system_ref) {
    const json j = {{"format", "fluorsep.measurement"},
                    {"name", name},
                    {"system", system_ref},
                    {"filters", string_list_json(m.camera().names())},
                    {"illuminants", string_list_json(m.illuminants().names())},
                    {"values", detail::matrix_json(m.values())},
                    {"gains", detail::matrix_json(m.gains().values())}};
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    write_text_file_atomic(path, detail::dump(j));
}

std::string_view to_string(Model m) {
    switch (m) {
    case Model::multi:
        return "multi";
    case Model::single:
        return "single";
    case Model::cim:
        return "cim";
    }
    return "?";
}

Model model_from_string(std::string_view name) {
    if (name == "multi")
        return Model::multi;
    if (name == "single")
        return Model::single;
    if (name == "cim")
        return Model::cim;
    throw std::invalid_argument("unknown model \"" + std::string{name} +
                                "\" (expected multi, single or cim)");
}

void RunConfig::validate() const {
    auto nonneg = [](const std::optional<double> &v, const char *what) {
        if (v && !(*v >= 0 && std::isfinite(*v)))
            throw std::invalid_argument(std::string{what} + " must be finite and nonnegative");
    };
    nonneg(alpha, "alpha");
    nonneg(beta, "beta");
    nonneg(eta, "eta");
    if (rho && !(*rho > 0 && std::isfinite(*rho)))
        throw std::invalid_argument("rho must be positive");
    if (max_iterations && *max_iterations < 1)
        throw std::invalid_argument("max_iterations must be at least 1");
    if (restarts < 0)
        throw std::invalid_argument("restarts must be nonnegative");
    if (n_r < 1 || n_x < 1 || n_m < 1)
        throw std::invalid_argument("basis sizes must be at least 1");
    for (int p : patches)
        if (p < 1)
            throw std::invalid_argument("patch numbers are 1-based, got " + std::to_string(p));
    if (!(rgb_gain > 0))
        throw std::invalid_argument("rgb_gain must be positive");
}

RunConfig parse_run_config(const std::string &json_text, const std::filesystem::path &base_dir,
                           const std::string &source) {
    const json j = detail::parse_json(json_text, source);
    detail::require_keys(j,
                         {"system", "fixtures", "patches", "bases", "model", "tuning", "seed", "out",
                          "snr_db", "measurements", "sweep", "smoke", "relight"},
                         source, "config");
    RunConfig c;
    auto path = [&](const json &obj, const char *key) {
        return detail::resolve_path(base_dir, detail::get_string(obj, key, source));
    };
    if (j.contains("system"))
        c.system = path(j, "system");
    if (j.contains("fixtures"))
        c.fixtures = path(j, "fixtures");
    if (j.contains("patches")) {
        if (!j.at("patches").is_array())
            detail::schema_error(source, "\"patches\" must be an array of 1-based integers");
        for (const auto &p : j.at("patches")) {
            if (!p.is_number_integer())
                detail::schema_error(source, "\"patches\" must be an array of 1-based integers");
            c.patches.push_back(p.get<int>());
        }
    }
    if (j.contains("bases")) {
        const auto &b = j.at("bases");
        detail::require_keys(b, {"reflectance", "excitation", "emission", "n_r", "n_x", "n_m"},
                             source, "bases");
        const bool any = b.contains("reflectance") || b.contains("excitation") ||
                         b.contains("emission");
        if (any) {
            c.reflectance_basis = path(b, "reflectance");
            c.excitation_basis = path(b, "excitation");
            c.emission_basis = path(b, "emission");
        }
        if (b.contains("n_r"))
            c.n_r = detail::get_int(b, "n_r", source);
        if (b.contains("n_x"))
            c.n_x = detail::get_int(b, "n_x", source);
        if (b.contains("n_m"))
            c.n_m = detail::get_int(b, "n_m", source);
    }
    if (j.contains("model"))
        c.model = model_from_string(detail::get_string(j, "model", source));
    if (j.contains("tuning")) {
        const auto &t = j.at("tuning");
        detail::require_keys(t, {"alpha", "beta", "eta", "rho", "max_iterations", "restarts"},
                             source, "tuning");
        if (t.contains("alpha"))
            c.alpha = detail::get_number(t, "alpha", source);
        if (t.contains("beta"))
            c.beta = detail::get_number(t, "beta", source);
        if (t.contains("eta"))
            c.eta = detail::get_number(t, "eta", source);
        if (t.contains("rho"))
            c.rho = detail::get_number(t, "rho", source);
        if (t.contains("max_iterations"))
            c.max_iterations = detail::get_int(t, "max_iterations", source);
        if (t.contains("restarts"))
            c.restarts = detail::get_int(t, "restarts", source);
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            detail::schema_error(source, "\"seed\" must be a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("out"))
        c.out = path(j, "out");
    if (j.contains("snr_db"))
        c.snr_db = detail::get_number(j, "snr_db", source);
    if (j.contains("measurements")) {
        for (const auto &m : string_list(j, "measurements", source))
            c.measurements.push_back(detail::resolve_path(base_dir, m));
    }
    if (j.contains("sweep"))
        c.sweep = detail::get_string(j, "sweep", source);
    if (j.contains("smoke")) {
        if (!j.at("smoke").is_boolean())
            detail::schema_error(source, "\"smoke\" must be true or false");
        c.smoke = j.at("smoke").get<bool>();
    }
    if (j.contains("relight")) {
        const auto &r = j.at("relight");
        detail::require_keys(r, {"estimate", "illuminants", "rgb_camera", "rgb_gain"}, source,
                             "relight");
        if (r.contains("estimate"))
            c.estimate = path(r, "estimate");
        if (r.contains("illuminants"))
            c.relight_illuminants = path(r, "illuminants");
        if (r.contains("rgb_camera"))
            c.rgb_camera = path(r, "rgb_camera");
        if (r.contains("rgb_gain"))
            c.rgb_gain = detail::get_number(r, "rgb_gain", source);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        detail::schema_error(source, e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    return parse_run_config(read_text_file(path), path.parent_path(), path.string());
}

std::string run_config_json(const RunConfig &c) {
    auto opt = [](const auto &v) { return v ? json(*v) : json(nullptr); };
    json measurements = json::array();
    for (const auto &m : c.measurements)
        measurements.push_back(m.generic_string());
    json patches = json::array();
    for (int p : c.patches)
        patches.push_back(p);
    const json j = {
        {"system", c.system.generic_string()},
        {"fixtures", c.fixtures.generic_string()},
        {"patches", patches},
        {"bases",
         {{"reflectance", c.reflectance_basis.generic_string()},
          {"excitation", c.excitation_basis.generic_string()},
          {"emission", c.emission_basis.generic_string()},
          {"n_r", c.n_r},
          {"n_x", c.n_x},
          {"n_m", c.n_m}}},
        {"model", std::string{to_string(c.model)}},
        {"tuning",
         {{"alpha", opt(c.alpha)},
          {"beta", opt(c.beta)},
          {"eta", opt(c.eta)},
          {"rho", opt(c.rho)},
          {"max_iterations", opt(c.max_iterations)},
          {"restarts", c.restarts}}},
        {"seed", c.seed},
        {"snr_db", opt(c.snr_db)},
        {"measurements", measurements},
        {"sweep", c.sweep},
        {"smoke", c.smoke},
        {"relight",
         {{"estimate", c.estimate.generic_string()},
          {"illuminants", c.relight_illuminants.generic_string()},
          {"rgb_camera", c.rgb_camera.generic_string()},
          {"rgb_gain", c.rgb_gain}}},
    };
    return detail::dump(j);
}

} // namespace fluorsep
