#pragma once

#include <stdexcept>
#include <string>

namespace fdlab {

/// Input violates a documented precondition (parameter regime, domain, shape).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a result (step underflow, Newton
/// breakdown). `last_reliable` carries the last position (radius or time)
/// up to which the computation is trustworthy.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double last_reliable)
      : std::runtime_error(what), last_reliable_(last_reliable) {}

  double last_reliable() const noexcept { return last_reliable_; }

 private:
  double last_reliable_;
};

}  // namespace fdlab
