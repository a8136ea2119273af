#pragma once

#include <stdexcept>
#include <string>

namespace blab {

enum class ErrorKind {
  parameter = 1,
  singularity,
  convergence,
  domain,
  fit,
  extraction,
  construction,
  unsupported,
  integration,
  estimation,
  step,
  decomposition,
  energy,
  io
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace blab
