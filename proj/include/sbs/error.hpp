#pragma once

#include <stdexcept>
#include <string>

namespace sbs {

/// Input rejected before any work is done. The cli maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// p_1 == p_2: the best arm is not unique.
class TiedBestArmError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A randomized construction ran out of attempts.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sbs
