#pragma once

#include <stdexcept>
#include <string>

namespace mcfil {

// Base for all library errors. Subclasses indicate which layer rejected the
// operation; the message carries the specifics (operator, widths, limits).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class CircuitError : public Error {
 public:
  explicit CircuitError(const std::string& msg) : Error(msg) {}
};

class CnfError : public Error {
 public:
  explicit CnfError(const std::string& msg) : Error(msg) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

class OracleError : public Error {
 public:
  explicit OracleError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace mcfil
