#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace platemorph {

enum class ErrorKind {
  Parse,
  Config,
  Io,
  Domain,
  NonDifferentiable,
  Singular,
  Degenerate,
  Tolerance,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NonDifferentiable: return "non-differentiable";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Tolerance: return "tolerance";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& msg)
      : Error(ErrorKind::Parse, msg + " at byte " + std::to_string(offset)), offset_(offset), message_(msg) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

// Process exit status for the command line tool.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Tolerance: return 2;
    case ErrorKind::Parse:
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::Domain: return 3;
    case ErrorKind::NonDifferentiable:
    case ErrorKind::Singular:
    case ErrorKind::Degenerate: return 4;
  }
  return 1;
}

}  // namespace platemorph
