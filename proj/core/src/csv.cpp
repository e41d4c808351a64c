#include "sidx/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "sidx/error.hpp"

namespace sidx {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    cells.push_back(cell);
    for (auto& c : cells) {
        const auto first = c.find_first_not_of(" \t");
        const auto last = c.find_last_not_of(" \t");
        c = first == std::string::npos ? std::string() : c.substr(first, last - first + 1);
        if (c.size() >= 2 && c.front() == '"' && c.back() == '"') c = c.substr(1, c.size() - 2);
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column, const std::string& source) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
        config_error(source + ": non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column '" +
                     column + "'");
    return value;
}

}  // namespace

Dataset ingest_csv(std::istream& in, const std::string& response, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) config_error(source + ": empty file");
    const std::vector<std::string> header = split_line(line);
    std::size_t target = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == response) target = c;
    if (target == header.size()) config_error(source + ": schema error, response column '" + response + "' not found");
    if (header.size() < 2) config_error(source + ": schema error, no feature columns");

    std::vector<std::vector<double>> rows;
    std::size_t row = 1;  // data rows are numbered from 1, the header is row 0
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            ++row;
            continue;
        }
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            config_error(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(header.size()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_cell(cells[c], row, header[c], source);
        rows.push_back(std::move(values));
        ++row;
    }
    if (rows.empty()) config_error(source + ": no data rows");

    Dataset data;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(header.size() - 1);
    data.X.resize(n, p);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == target) {
                data.y(i) = rows[i][c];
            } else {
                data.X(i, j++) = rows[i][c];
            }
        }
    }
    data.validate();
    return data;
}

Dataset ingest_csv(const std::filesystem::path& path, const std::string& response) {
    std::ifstream in(path);
    if (!in) config_error("cannot open '" + path.string() + "'");
    return ingest_csv(in, response, path.string());
}

void write_dataset_csv(const Dataset& data, std::ostream& out, const std::string& response) {
    for (Eigen::Index j = 0; j < data.p(); ++j) out << 'x' << (j + 1) << ',';
    out << response << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.p(); ++j) out << format_double(data.X(i, j)) << ',';
        out << format_double(data.y(i)) << '\n';
    }
}

}  // namespace sidx
