#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erx {

/// Non-finite entries, negative radii and similar malformed arguments.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A group/block structure that does not match the vector it is applied to.
struct StructureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Solver or builder settings that cannot be honoured (step sizes, norms
/// without a usable proximity operator).
struct ConfigurationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed file contents. `offset` is the byte position where parsing
/// stopped.
struct ParseError : std::runtime_error {
    ParseError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset(offset) {}
    std::size_t offset;
};

} // namespace erx
