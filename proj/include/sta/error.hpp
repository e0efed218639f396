#pragma once

#include <stdexcept>
#include <string>

namespace sta {

/// Failure categories raised by the library.
enum class ErrorKind {
  Domain,       // argument outside the operation's domain
  Convergence,  // iterative solve did not converge
  Tolerance,    // a numerical check exceeded its tolerance
  Unitarity,    // accumulated drift away from a unitary matrix
  Overflow,     // state left the representable range
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& what) {
  return Error(ErrorKind::Domain, what);
}

}  // namespace sta
