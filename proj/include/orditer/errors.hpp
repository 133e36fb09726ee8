#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orditer {

// Raised by the text parsers; position is a byte offset into the input.
struct SyntaxError : std::runtime_error {
  std::size_t position;
  SyntaxError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
};

struct NotALimit : std::runtime_error {
  NotALimit() : std::runtime_error("fundamental sequence requires a limit ordinal") {}
};

struct UnknownBuiltin : std::runtime_error {
  explicit UnknownBuiltin(const std::string& name)
      : std::runtime_error("unknown builtin: " + name) {}
};

// The piecewise function fragment cannot represent the requested result.
struct FragmentOverflow : std::runtime_error {
  explicit FragmentOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Every evaluation strategy is exhausted for this input; this is a final
// verdict, not an unknown-so-far.
struct NonComputable : std::runtime_error {
  explicit NonComputable(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace orditer
