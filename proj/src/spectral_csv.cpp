#include <fluorsep/spectral_csv.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace fluorsep {

namespace {

std::string location(const std::string &file, int line, int column) {
    std::ostringstream os;
    os << file;
    if (line > 0) {
        os << ":" << line;
        if (column > 0)
            os << ":" << column;
    }
    return os.str();
}

struct Cell {
    std::string_view text;
    int column; // 1-based character offset of the cell start
};

std::vector<Cell> split_row(std::string_view line) {
    std::vector<Cell> cells;
    std::size_t begin = 0;
    while (true) {
        const auto comma = line.find(',', begin);
        const auto end = comma == std::string_view::npos ? line.size() : comma;
        auto cell = line.substr(begin, end - begin);
        int col = static_cast<int>(begin) + 1;
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
            cell.remove_prefix(1);
            ++col;
        }
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.push_back({cell, col});
        if (comma == std::string_view::npos)
            break;
        begin = comma + 1;
    }
    return cells;
}

double parse_double(const Cell &cell, const std::string &source, int line) {
    double value = 0.0;
    const char *first = cell.text.data();
    const char *last = first + cell.text.size();
    if (!cell.text.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw ParseError(source, line, cell.column,
                         "expected a number, found '" + std::string{cell.text} + "'");
    return value;
}

std::vector<std::string_view> lines_of(const std::string &text) {
    std::vector<std::string_view> lines;
    std::string_view all{text};
    std::size_t begin = 0;
    while (begin <= all.size()) {
        const auto nl = all.find('\n', begin);
        const auto end = nl == std::string_view::npos ? all.size() : nl;
        lines.push_back(all.substr(begin, end - begin));
        if (nl == std::string_view::npos)
            break;
        begin = nl + 1;
    }
    return lines;
}

bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

} // namespace

ParseError::ParseError(std::string file, int line, int column, const std::string &message)
    : std::runtime_error(location(file, line, column) + ": " + message), file_{std::move(file)},
      line_{line}, column_{column}, detail_{message} {}

Spectrum SpectralTable::spectrum(int c, const WavelengthGrid &grid, SpectralRole role) const {
    if (c < 0 || c >= columns())
        throw std::out_of_range("SpectralTable::spectrum: column out of range");
    return {grid, resample(wavelengths, values.col(c), grid), role};
}

std::vector<Spectrum> SpectralTable::spectra(const WavelengthGrid &grid, SpectralRole role) const {
    std::vector<Spectrum> out;
    out.reserve(names.size());
    for (int c = 0; c < columns(); ++c)
        out.push_back(spectrum(c, grid, role));
    return out;
}

WavelengthGrid SpectralTable::native_grid() const {
    const int n = static_cast<int>(wavelengths.size());
    if (n < 2)
        throw std::invalid_argument("SpectralTable: need at least two rows for a grid");
    const double step = (wavelengths.back() - wavelengths.front()) / (n - 1);
    for (int k = 0; k < n; ++k)
        if (std::abs(wavelengths[k] - (wavelengths.front() + step * k)) > 1e-6 * step)
            throw std::invalid_argument("SpectralTable: wavelengths are not uniformly spaced");
    return {wavelengths.front(), step, n};
}

SpectralTable parse_spectral_csv(const std::string &text, const std::string &source) {
    const auto lines = lines_of(text);
    std::size_t k = 0;
    while (k < lines.size() && blank(lines[k]))
        ++k;
    if (k == lines.size())
        throw ParseError(source, 0, 0, "empty file");

    SpectralTable table;
    std::string_view header = lines[k];
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF")
        header.remove_prefix(3);
    const auto head = split_row(header);
    const int header_line = static_cast<int>(k) + 1;
    if (head.front().text != "wavelength_nm")
        throw ParseError(source, header_line, head.front().column,
                         "first header column must be 'wavelength_nm'");
    if (head.size() < 2)
        throw ParseError(source, header_line, 0, "no value columns in header");
    for (std::size_t c = 1; c < head.size(); ++c) {
        if (head[c].text.empty())
            throw ParseError(source, header_line, head[c].column, "empty column name");
        table.names.emplace_back(head[c].text);
    }

    const auto ncols = head.size();
    std::vector<std::vector<double>> rows;
    for (++k; k < lines.size(); ++k) {
        if (blank(lines[k]))
            continue;
        const int line_no = static_cast<int>(k) + 1;
        const auto cells = split_row(lines[k]);
        if (cells.size() != ncols)
            throw ParseError(source, line_no, 0,
                             "expected " + std::to_string(ncols) + " fields, found " +
                                 std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(ncols);
        for (const auto &cell : cells)
            row.push_back(parse_double(cell, source, line_no));
        if (!table.wavelengths.empty() && !(row.front() > table.wavelengths.back()))
            throw ParseError(source, line_no, cells.front().column,
                             "wavelengths must be strictly increasing");
        table.wavelengths.push_back(row.front());
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError(source, header_line, 0, "no data rows");

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(ncols - 1));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 1; c < ncols; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
                rows[r][c];
    return table;
}

SpectralTable read_spectral_csv(const std::filesystem::path &path) {
    return parse_spectral_csv(read_text_file(path), path.string());
}

std::string format_number(double value) {
    if (value == 0.0)
        return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{})
        throw std::runtime_error("format_number: conversion failed");
    return {buf, ptr};
}

std::string format_spectral_csv(const WavelengthGrid &grid, const std::vector<std::string> &names,
                                const Eigen::MatrixXd &columns) {
    if (columns.rows() != grid.size() || columns.cols() != static_cast<Eigen::Index>(names.size()))
        throw std::invalid_argument("format_spectral_csv: table is " +
                                    std::to_string(columns.rows()) + "x" +
                                    std::to_string(columns.cols()) + " but grid has " +
                                    std::to_string(grid.size()) + " bins and " +
                                    std::to_string(names.size()) + " names");
    std::string out = "wavelength_nm";
    for (const auto &n : names)
        out += "," + n;
    out += "\n";
    for (int r = 0; r < grid.size(); ++r) {
        out += format_number(grid.wavelength(r));
        for (Eigen::Index c = 0; c < columns.cols(); ++c)
            out += "," + format_number(columns(r, c));
        out += "\n";
    }
    return out;
}

void write_spectral_csv(const std::filesystem::path &path, const WavelengthGrid &grid,
                        const std::vector<std::string> &names, const Eigen::MatrixXd &columns) {
    write_text_file_atomic(path, format_spectral_csv(grid, names, columns));
}

std::string format_donaldson_csv(const DonaldsonMatrix &donaldson) {
    const auto &g = donaldson.grid();
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(g.size()));
    for (int p = 0; p < g.size(); ++p)
        names.push_back(format_number(g.wavelength(p)));
    return format_spectral_csv(g, names, donaldson.entries());
}

DonaldsonMatrix parse_donaldson_csv(const std::string &text, const std::string &source) {
    auto table = parse_spectral_csv(text, source);
    const auto grid = table.native_grid();
    if (table.columns() != grid.size())
        throw ParseError(source, 1, 0,
                         "Donaldson matrix must be square: " + std::to_string(grid.size()) +
                             " rows, " + std::to_string(table.columns()) + " columns");
    return {grid, table.values};
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::filesystem::path &path, const std::string &contents) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << contents;
        if (!out.flush())
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace fluorsep
