#pragma once

#include <stdexcept>
#include <string>

namespace rtd3 {

// Invalid user-facing configuration (bad config value, unknown key,
// incompatible checkpoint).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (shape mismatch, empty sequence,
// sampling more than stored).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite value produced during forward/backward or training.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Short machine-readable tag for an exception, used in CLI error records.
inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  if (dynamic_cast<const ContractViolation*>(&e)) return "contract_violation";
  if (dynamic_cast<const NumericFault*>(&e)) return "numeric_fault";
  if (dynamic_cast<const IoError*>(&e)) return "io_error";
  return "internal_error";
}

}  // namespace rtd3
