#ifndef STEINREC_ERRORS_HPP
#define STEINREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace steinrec {

// Exit-code mapping used by the CLI: ConfigError -> 2, NumericError and
// SolverError -> 3, IoError -> 4.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolverError : public NumericError {
 public:
  explicit SolverError(const std::string& msg) : NumericError(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Tiny-scale diagnostics (brute-force search, expansion enumeration) refuse
// inputs beyond their intended size.
class DiagnosticScaleError : public ConfigError {
 public:
  explicit DiagnosticScaleError(const std::string& msg) : ConfigError(msg) {}
};

class RankError : public NumericError {
 public:
  explicit RankError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace steinrec

#endif
