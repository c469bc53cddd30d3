#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctcfar {

enum class ErrorKind {
  Config,      // invalid parameters or configuration
  Parse,       // malformed input file
  Degenerate,  // input carries no usable information (e.g. all-zero map)
  Numerical,   // root finder / calibration failure
  Estimation,  // truncation left nothing to estimate from
  Io,
};

/// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset)
      : Error(ErrorKind::Parse,
              what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

[[noreturn]] inline void config_error(const std::string& what) {
  throw Error(ErrorKind::Config, what);
}

}  // namespace ctcfar
