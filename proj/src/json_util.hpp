#pragma once

#include <fluorsep/spectral_csv.hpp>

#include <json.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <initializer_list>
#include <string>

namespace fluorsep::detail {

using nlohmann::json;

/// Parses JSON text; syntax errors become ParseError with line and column.
json parse_json(const std::string &text, const std::string &source);

/// Throws ParseError naming `source` and the offending key.
[[noreturn]] void schema_error(const std::string &source, const std::string &message);

/// Rejects keys outside `allowed`.
void require_keys(const json &j, std::initializer_list<const char *> allowed,
                  const std::string &source, const std::string &where);

double get_number(const json &j, const char *key, const std::string &source);
int get_int(const json &j, const char *key, const std::string &source);
std::string get_string(const json &j, const char *key, const std::string &source);

/// Array of equal-length numeric rows.
Eigen::MatrixXd get_matrix(const json &j, const std::string &source, const std::string &what);
json matrix_json(const Eigen::MatrixXd &m);

/// Exact number echo; serialized with the shortest round-trip form.
json number_json(double v);

/// Two-space indented text with a trailing newline.
std::string dump(const json &j);

std::filesystem::path resolve_path(const std::filesystem::path &base, const std::string &p);

} // namespace fluorsep::detail
