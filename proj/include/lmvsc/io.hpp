#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lmvsc::io {

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Row-major numeric CSV. Throws IoError, ParseError (non-numeric cell,
/// ragged rows, empty file).
Eigen::MatrixXd read_csv(const std::filesystem::path& path, bool has_header = false);
std::string format_csv(const Eigen::MatrixXd& m);
std::string format_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header);

/// Matrix Market `matrix array|coordinate real|integer|pattern general`.
Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path);
std::string format_matrix_market_array(const Eigen::MatrixXd& m);
/// Coordinate format listing entries with |value| > 0.
std::string format_matrix_market_coordinate(const Eigen::MatrixXd& m);

/// Shortest text that round-trips the double exactly.
std::string format_double(double x);

} // namespace lmvsc::io
