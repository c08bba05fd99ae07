#ifndef STEINREC_MATRIX_IO_HPP
#define STEINREC_MATRIX_IO_HPP

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace steinrec {

// Shortest representation that round-trips a double exactly.
std::string format_double(double value);

// CSV layout: header line "rows,cols", then one comma-separated line per row.
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& values);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// FNV-1a over a string, hex-encoded; used to fingerprint config sections in
// artifact metadata.
std::string fnv1a_hex(const std::string& data);

}  // namespace steinrec

#endif
