#pragma once

#include <stdexcept>
#include <string>

namespace ecoap {

enum class ErrorKind {
  Config,        // invalid parameter or out-of-range value
  Io,            // file cannot be read or written
  Parse,         // malformed input file
  Consistency,   // inputs disagree (UE/AP id sets)
  Input,         // invalid argument to an operation
  Infeasible,    // requested densities exceed available gridpoints
  Placement,     // cluster zones could not be placed disjointly
  Numerical,     // factorization failure
  Degenerate,    // data carries no spread (bandwidth undefined)
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; the CLI maps `kind()` to exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace ecoap
