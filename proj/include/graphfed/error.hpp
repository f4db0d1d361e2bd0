#pragma once

#include <stdexcept>
#include <string>

namespace graphfed {

// Malformed user input: bad vertex ids, wrong file contents, inconsistent sizes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (overlap out of range, m < 2, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violations of the master/worker wire protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphfed
