#include "steinrec/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "steinrec/errors.hpp"

namespace steinrec {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& values) {
  std::ostringstream out;
  out << values.rows() << "," << values.cols() << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j != 0) out << ",";
      out << format_double(values(i, j));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw IoError("empty matrix file: " + path.string());
  long rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows < 0 ||
      cols < 0)
    throw IoError("bad matrix header in " + path.string());
  Eigen::MatrixXd values(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw IoError("truncated matrix file: " + path.string());
    const char* p = line.c_str();
    for (long j = 0; j < cols; ++j) {
      char* end = nullptr;
      values(i, j) = std::strtod(p, &end);
      if (end == p) throw IoError("bad matrix entry in " + path.string());
      p = end;
      if (*p == ',') ++p;
    }
  }
  return values;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace steinrec
