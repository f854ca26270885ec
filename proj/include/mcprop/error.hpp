#pragma once

#include <stdexcept>
#include <string>

namespace mcprop {

// Error taxonomy. The CLI maps all of these to exit code 1; usage errors
// (bad flags) are handled by the argument parser and exit with 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failures (open/read/write/rename).
struct IoError : Error {
    using Error::Error;
};

// A file the corresponding writer could not have produced.
struct FormatError : Error {
    using Error::Error;
};

// Precondition violation on an operation's inputs.
struct DomainError : Error {
    using Error::Error;
};

// Input is valid but the operation is undefined on it (constant image in
// Otsu, both-empty masks in the IoU loss, zero-variance correlation input).
struct DegenerateInputError : Error {
    using Error::Error;
};

// No valid window origin exists to search over.
struct EmptyMaskError : Error {
    using Error::Error;
};

// Instance exceeds the work bound of a brute-force reference path.
struct OracleScaleError : Error {
    using Error::Error;
};

} // namespace mcprop
