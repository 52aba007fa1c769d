#pragma once

#include <stdexcept>
#include <string>

namespace gausschain {

// Numerical failure inside an otherwise valid computation (lost positive
// definiteness, non-finite intermediate, quadrature breakdown).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Request refused because it would exceed a documented resource cap.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gausschain
