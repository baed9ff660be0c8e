#pragma once

#include <stdexcept>
#include <string>

namespace vla {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value does not fit the field it is written to, or a parameter is outside
// its admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

// An index or bit offset lies outside a container.
class BoundsError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

// A letter cannot be encoded with the supplied code.
class EncodingError : public Error {
public:
    using Error::Error;
};

// Stored bits do not decode to a valid codeword, or a container section is
// truncated or inconsistent with its header.
class CorruptionError : public Error {
public:
    using Error::Error;
};

// Not a container file at all (bad magic, unknown variant tag).
class FormatError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

// An access routine was called on a sequence built as a different variant.
class VariantMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace vla
