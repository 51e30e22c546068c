#include "json_util.hpp"

#include <cmath>

namespace fluorsep::detail {

json parse_json(const std::string &text, const std::string &source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        int line = 1;
        int column = 1;
        for (std::size_t k = 0; k < end; ++k) {
            if (text[k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string what = e.what();
        if (const auto at = what.find("syntax error"); at != std::string::npos)
            what = what.substr(at);
        throw ParseError(source, line, column, what);
    }
}

void schema_error(const std::string &source, const std::string &message) {
    throw ParseError(source, 0, 0, message);
}

void require_keys(const json &j, std::initializer_list<const char *> allowed,
                  const std::string &source, const std::string &where) {
    if (!j.is_object())
        schema_error(source, where + " must be a JSON object");
    for (const auto &[key, value] : j.items()) {
        bool known = false;
        for (const char *a : allowed)
            known = known || key == a;
        if (!known)
            schema_error(source, "unknown key \"" + key + "\" in " + where);
    }
}

double get_number(const json &j, const char *key, const std::string &source) {
    if (!j.contains(key))
        schema_error(source, std::string{"missing key \""} + key + "\"");
    const auto &v = j.at(key);
    if (!v.is_number())
        schema_error(source, std::string{"\""} + key + "\" must be a number");
    return v.get<double>();
}

int get_int(const json &j, const char *key, const std::string &source) {
    if (!j.contains(key))
        schema_error(source, std::string{"missing key \""} + key + "\"");
    const auto &v = j.at(key);
    if (!v.is_number_integer())
        schema_error(source, std::string{"\""} + key + "\" must be an integer");
    return v.get<int>();
}

std::string get_string(const json &j, const char *key, const std::string &source) {
    if (!j.contains(key))
        schema_error(source, std::string{"missing key \""} + key + "\"");
    const auto &v = j.at(key);
    if (!v.is_string())
        schema_error(source, std::string{"\""} + key + "\" must be a string");
    return v.get<std::string>();
}

Eigen::MatrixXd get_matrix(const json &j, const std::string &source, const std::string &what) {
    if (!j.is_array() || j.empty())
        schema_error(source, what + " must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.empty())
            schema_error(source, what + " row " + std::to_string(r + 1) + " must be a non-empty array");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            schema_error(source, what + " row " + std::to_string(r + 1) + " has " +
                                     std::to_string(row.size()) + " values, row 1 has " +
                                     std::to_string(cols));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto &v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                schema_error(source, what + " row " + std::to_string(r + 1) + " column " +
                                         std::to_string(c + 1) + " is not a number");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

json number_json(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json matrix_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(number_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string dump(const json &j) {
    return j.dump(2) + "\n";
}

std::filesystem::path resolve_path(const std::filesystem::path &base, const std::string &p) {
    const std::filesystem::path path{p};
    if (path.is_absolute() || base.empty())
        return path.lexically_normal();
    return (base / path).lexically_normal();
}

} // namespace fluorsep::detail
