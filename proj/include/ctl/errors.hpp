#pragma once

#include <stdexcept>

namespace ctl {

// Bad configuration or semantically invalid input; the CLI maps this to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file content (wrong arity, non-numeric field, bad header).
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

// Filesystem-level failure (missing file, unwritable directory); exit 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ctl
