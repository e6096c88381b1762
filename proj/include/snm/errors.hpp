#pragma once

#include <stdexcept>
#include <string>

namespace snm {

// Bad configuration: invalid flag values, malformed template lines, etc.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Lookup of an unknown feature / word / key.
class LookupError : public std::runtime_error {
public:
  explicit LookupError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace snm
