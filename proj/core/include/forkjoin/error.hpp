#pragma once

#include <stdexcept>
#include <string>

namespace forkjoin {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: malformed config, invalid parameters, unknown presets.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Corrupted simulation state (negative queue, broken balance identity).
// Reaching this is a bug, not a user error; experiment drivers map it to
// a dedicated exit code.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(what) {}
};

}  // namespace forkjoin
