#pragma once

#include <stdexcept>
#include <string>

namespace wtlstm {

// Caller broke a documented precondition: bad shapes, bad ranges, malformed
// input data or configuration. The CLI maps these to exit code 1.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure that only shows up while running: diverging training, I/O.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace wtlstm
