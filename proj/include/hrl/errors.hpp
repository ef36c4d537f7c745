#pragma once

#include <stdexcept>
#include <string>

namespace hrl {

// Every error thrown by the library carries a short machine-readable code so
// the CLI can report it on the diagnostics stream.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// A caller broke a documented precondition (bad shape, out-of-range action, ...).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error("E_CONTRACT", what) {}
};

// Bad configuration; `key` is the dotted config path when one applies.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("E_CONFIG", key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// NaN/Inf showed up in a loss or gradient. `index` locates the offending
// element (parameter index or batch row).
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long index)
      : Error("E_NUMERIC", what + " (index " + std::to_string(index) + ")"), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("E_IO", what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace hrl
