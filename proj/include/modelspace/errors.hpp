#pragma once

#include <stdexcept>
#include <string>

namespace modelspace {

/// Numerical failure inside a module (indefinite Gram, overlap, search guard
/// hit...). Carries the module name so front ends can report it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

}  // namespace modelspace
