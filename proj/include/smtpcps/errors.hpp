#pragma once

#include <stdexcept>
#include <string>

namespace smtpcps {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (dimension mismatch, bad scalar, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class EmptySetError : public Error {
 public:
  using Error::Error;
};

class UnboundedSetError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// mRPI iteration did not reach the requested contraction within its cap.
class NonContractiveError : public Error {
 public:
  using Error::Error;
};

/// A certificate that must hold by construction was violated.
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

/// The target set vanished (or lost its interior) under erosion by the disturbance.
class ErosionEmptyError : public Error {
 public:
  using Error::Error;
};

/// State lies outside the outermost controllable set.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Sender and receiver automata disagree; must never happen under correct tolerances.
class ProtocolDesyncError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Malformed, tampered or inconsistent family cache file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace smtpcps
