#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icegnn {

/// Operand shapes are incompatible for the requested operation.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An argument is outside the documented domain of an operation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A NaN or Inf showed up where finite values are required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a structural requirement (layer counts, widths, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition, e.g. feeding raw data to a model.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed serialized input. Carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Stored content hash does not match the bytes on disk.
class CorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace icegnn
