#pragma once

#include <stdexcept>
#include <string>

namespace algh {

// Non-finite value produced while evaluating a field.
class NumericalDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or index mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A derived field asked for more nested derivative levels than exist.
class DerivativeDepthError : public std::logic_error {
 public:
  DerivativeDepthError() : std::logic_error("derivative nesting exceeds the supported depth") {}
};

class SingularMorphismError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularHessianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSymplecticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationBlowupError : public std::runtime_error {
 public:
  IntegrationBlowupError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace algh
