#pragma once

#include <stdexcept>
#include <string>

namespace sidle {

// Invalid scenario or module configuration. key() names the offending
// configuration key (dotted path) when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what),
        key_(std::move(key)) {}

  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cell has no live node left to lead it.
class CellExtinct : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No live head cluster remains to act as master.
class NetworkHeadless : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A protocol invariant broke mid-run. what() carries a trace excerpt.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sidle
