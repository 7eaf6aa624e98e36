#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad data handed to an operation (non-finite feature, malformed simplex, ...).
struct InvalidInput : Error {
    using Error::Error;
};

// Bad hyperparameter or configuration (sigma <= 0, partition gaps, ...).
struct InvalidConfig : Error {
    using Error::Error;
};

// Insert attempted on a full buffer.
struct CapacityError : Error {
    using Error::Error;
};

// Dataset file rejected; `kind` identifies the failure class and `offset`
// the byte (binary) or line (CSV) where it was detected.
struct ParseError : Error {
    enum class Kind {
        Io,
        BadMagic,
        BadHeader,
        EmptyDataset,
        SizeMismatch,
        LabelRange,
    };

    ParseError(Kind k, std::size_t off, const std::string& msg)
        : Error(msg), kind(k), offset(off) {}

    Kind kind;
    std::size_t offset;
};

} // namespace msel
