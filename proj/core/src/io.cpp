#include "gvar/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "gvar/errors.hpp"

namespace gvar {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::size_t lo = start, hi = end;
            while (lo < hi && (line[lo] == ' ' || line[lo] == '\t')) ++lo;
            while (hi > lo && (line[hi - 1] == ' ' || line[hi - 1] == '\t')) --hi;
            double value = 0.0;
            const auto res = std::from_chars(line.data() + lo, line.data() + hi, value);
            if (res.ec != std::errc{} || res.ptr != line.data() + hi)
                throw IoError(origin + ": cannot parse '" + line.substr(start, end - start) +
                              "' as a number");
            row.push_back(value);
            if (end == line.size()) break;
            start = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(origin + ": ragged rows (" + std::to_string(row.size()) + " vs " +
                          std::to_string(rows.front().size()) + " fields)");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(origin + ": empty input");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv_matrix(in, path);
}

void write_csv_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv_matrix(out, m);
}

Eigen::VectorXd read_csv_vector(const std::string& path) {
    const Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw IoError(path + ": expected a single row or column, got " + std::to_string(m.rows()) +
                  "x" + std::to_string(m.cols()));
}

} // namespace gvar
