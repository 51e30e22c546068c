#include <fluorsep/estimate_io.hpp>
#include <fluorsep/metrics.hpp>
#include <fluorsep/spectral_csv.hpp>

#include "json_util.hpp"

#include <sstream>
#include <stdexcept>

namespace fluorsep {

using detail::json;

namespace {

json vector_json(const Eigen::VectorXd &v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out.push_back(detail::number_json(v[k]));
    return out;
}

Eigen::VectorXd get_vector(const json &j, const char *key, const std::string &source) {
    if (!j.contains(key))
        return {};
    const auto &v = j.at(key);
    if (!v.is_array())
        detail::schema_error(source, std::string{"\""} + key + "\" must be an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number())
            detail::schema_error(source, std::string{"\""} + key + "\" must hold numbers");
        out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
    }
    return out;
}

void finish(EstimateRecord &r, const MeasurementGrid &m, Eigen::MatrixXd fitted) {
    r.illuminant_names = m.illuminants().names();
    r.pixel_rmse = rmse(fitted, m.values());
    r.fitted = std::move(fitted);
}

} // namespace

SurfacePatch EstimateRecord::surface() const {
    if (!donaldson)
        throw std::invalid_argument("estimate \"" + name + "\" (model " +
                                    std::string{to_string(model)} +
                                    ") has no Donaldson matrix and cannot be relit");
    return {reflectance, *donaldson};
}

EstimateRecord make_record(std::string name, const MultiEstimate &e, const MeasurementGrid &m) {
    EstimateRecord r;
    r.name = std::move(name);
    r.model = Model::multi;
    r.reflectance = e.reflectance;
    r.donaldson = e.donaldson;
    r.w_r = e.w_r;
    r.w = e.w;
    r.residual_norm = e.residual_norm;
    r.objective = e.objective;
    r.iterations = e.iterations_run;
    r.converged = e.converged;
    for (const auto &h : e.history)
        r.history.push_back(h.objective);
    finish(r, m,
           predict_pixels(e.reflectance.values(), e.donaldson.entries(), m.system(), m.gains()));
    return r;
}

EstimateRecord make_record(std::string name, const SingleEstimate &e, const MeasurementGrid &m) {
    EstimateRecord r;
    r.name = std::move(name);
    r.model = Model::single;
    r.reflectance = e.reflectance;
    r.donaldson = e.donaldson;
    r.excitation = e.excitation;
    r.emission = e.emission;
    r.w_r = e.w_r;
    r.w_x = e.w_x;
    r.w_m = e.w_m;
    r.residual_norm = e.residual_norm;
    r.objective = e.objective;
    r.iterations = e.outer_iterations;
    r.converged = e.converged;
    r.degenerate = e.degenerate;
    r.normalization_factor = e.normalization_factor;
    r.history = e.history;
    finish(r, m,
           predict_pixels(e.reflectance.values(), e.donaldson.entries(), m.system(), m.gains()));
    return r;
}

EstimateRecord make_record(std::string name, const CimEstimate &e, const MeasurementGrid &m) {
    EstimateRecord r;
    r.name = std::move(name);
    r.model = Model::cim;
    r.reflectance = e.reflectance;
    r.emission = e.emission;
    r.p = e.p;
    r.w_r = e.w_r;
    r.w_m = e.w_m;
    r.residual_norm = e.residual_norm;
    r.objective = e.objective;
    r.iterations = e.outer_iterations;
    r.converged = e.converged;
    r.degenerate = e.degenerate;
    r.normalization_factor = e.normalization_factor;
    r.history = e.history;
    finish(r, m, predict_cim_pixels(e.reflectance.values(), e.emission.values(), e.p, m));
    return r;
}

void write_estimate(const std::filesystem::path &out, const EstimateRecord &r) {
    const auto spectra_dir = out / "spectra";
    const auto estimates_dir = out / "estimates";
    std::filesystem::create_directories(spectra_dir);
    std::filesystem::create_directories(estimates_dir);
    const auto &grid = r.reflectance.grid();

    std::vector<std::string> names{"reflectance"};
    std::vector<const Eigen::VectorXd *> cols{&r.reflectance.values()};
    if (r.excitation) {
        names.push_back("excitation");
        cols.push_back(&r.excitation->values());
    }
    if (r.emission) {
        names.push_back("emission");
        cols.push_back(&r.emission->values());
    }
    Eigen::MatrixXd table(grid.size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        table.col(static_cast<Eigen::Index>(c)) = *cols[c];
    write_spectral_csv(spectra_dir / (r.name + ".csv"), grid, names, table);

    json spectra = {{"spectra", "../spectra/" + r.name + ".csv"}};
    if (r.donaldson) {
        write_text_file_atomic(spectra_dir / (r.name + "_donaldson.csv"),
                               format_donaldson_csv(*r.donaldson));
        spectra["donaldson"] = "../spectra/" + r.name + "_donaldson.csv";
    }
    json weights = {{"w_r", vector_json(r.w_r)}};
    if (r.model == Model::multi)
        weights["w"] = detail::matrix_json(r.w);
    if (r.model == Model::single)
        weights["w_x"] = vector_json(r.w_x);
    if (r.model != Model::multi)
        weights["w_m"] = vector_json(r.w_m);
    if (r.model == Model::cim) {
        std::ostringstream csv;
        for (std::size_t k = 0; k < r.illuminant_names.size(); ++k)
            csv << (k ? "," : "") << r.illuminant_names[k];
        csv << '\n';
        for (Eigen::Index k = 0; k < r.p.size(); ++k)
            csv << (k ? "," : "") << format_number(r.p[k]);
        csv << '\n';
        write_text_file_atomic(spectra_dir / (r.name + "_p.csv"), csv.str());
        spectra["p"] = "../spectra/" + r.name + "_p.csv";
        weights["p"] = vector_json(r.p);
    }
    json history = json::array();
    for (double h : r.history)
        history.push_back(detail::number_json(h));
    const json j = {
        {"format", "fluorsep.estimate"},
        {"name", r.name},
        {"model", std::string{to_string(r.model)}},
        {"grid", {{"start_nm", grid.start()}, {"step_nm", grid.step()}, {"count", grid.size()}}},
        {"files", spectra},
        {"weights", weights},
        {"illuminants", r.illuminant_names},
        {"diagnostics",
         {{"pixel_rmse", detail::number_json(r.pixel_rmse)},
          {"residual_norm", detail::number_json(r.residual_norm)},
          {"objective", detail::number_json(r.objective)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"degenerate", r.degenerate},
          {"normalization_factor", detail::number_json(r.normalization_factor)}}},
        {"fitted_pixels", detail::matrix_json(r.fitted)},
        {"history", history},
    };
    write_text_file_atomic(estimates_dir / (r.name + ".json"), detail::dump(j));
}

EstimateRecord load_estimate(const std::filesystem::path &path) {
    const std::string source = path.string();
    const json j = detail::parse_json(read_text_file(path), source);
    if (!j.is_object() || !j.contains("format") || j.at("format") != "fluorsep.estimate")
        detail::schema_error(source, "\"format\" must be \"fluorsep.estimate\"");
    const auto &g = j.at("grid");
    const WavelengthGrid grid{detail::get_number(g, "start_nm", source),
                              detail::get_number(g, "step_nm", source),
                              detail::get_int(g, "count", source)};
    const auto &files = j.at("files");
    const auto base = path.parent_path();
    const auto table =
        read_spectral_csv(detail::resolve_path(base, detail::get_string(files, "spectra", source)));
    auto column = [&](const std::string &name) -> std::optional<Spectrum> {
        for (int c = 0; c < table.columns(); ++c)
            if (table.names[static_cast<std::size_t>(c)] == name)
                return table.spectrum(c, grid);
        return std::nullopt;
    };
    auto refl = column("reflectance");
    if (!refl)
        detail::schema_error(source, "spectra file has no reflectance column");

    EstimateRecord r;
    r.name = detail::get_string(j, "name", source);
    r.model = model_from_string(detail::get_string(j, "model", source));
    r.reflectance = Spectrum{grid, refl->values(), SpectralRole::reflectance};
    r.excitation = column("excitation");
    r.emission = column("emission");
    if (files.contains("donaldson")) {
        const auto p = detail::resolve_path(base, detail::get_string(files, "donaldson", source));
        r.donaldson = parse_donaldson_csv(read_text_file(p), p.string());
        require_same_grid(grid, r.donaldson->grid(), source);
    }
    const auto &w = j.at("weights");
    r.w_r = get_vector(w, "w_r", source);
    r.w_x = get_vector(w, "w_x", source);
    r.w_m = get_vector(w, "w_m", source);
    r.p = get_vector(w, "p", source);
    if (w.contains("w"))
        r.w = detail::get_matrix(w.at("w"), source, "weights.w");
    if (j.contains("illuminants"))
        r.illuminant_names = j.at("illuminants").get<std::vector<std::string>>();
    const auto &d = j.at("diagnostics");
    auto num = [&](const char *key) {
        return d.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : detail::get_number(d, key, source);
    };
    r.pixel_rmse = num("pixel_rmse");
    r.residual_norm = num("residual_norm");
    r.objective = num("objective");
    r.normalization_factor = num("normalization_factor");
    r.iterations = detail::get_int(d, "iterations", source);
    r.converged = d.at("converged").get<bool>();
    r.degenerate = d.at("degenerate").get<bool>();
    for (const auto &h : j.at("history"))
        r.history.push_back(h.is_null() ? std::numeric_limits<double>::quiet_NaN() : h.get<double>());
    return r;
}

} // namespace fluorsep
