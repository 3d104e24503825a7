#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace gvar {

/// Shortest decimal string that round-trips the IEEE-754 double exactly.
[[nodiscard]] std::string format_double(double value);

/// Row-major CSV without header, `,` separator.
[[nodiscard]] Eigen::MatrixXd read_csv_matrix(const std::string& path);
[[nodiscard]] Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& origin);
void write_csv_matrix(std::ostream& out, const Eigen::MatrixXd& m);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

/// Single row or single column file as a vector.
[[nodiscard]] Eigen::VectorXd read_csv_vector(const std::string& path);

} // namespace gvar
