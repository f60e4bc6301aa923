#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cephreg {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data (bad file, bad record, empty set).
class DataError : public Error {
public:
    using Error::Error;
};

/// Input text or binary that failed to parse. Carries the position of the
/// offending record when known.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::optional<std::size_t> byte_offset,
               std::optional<std::size_t> line = std::nullopt);

    std::optional<std::size_t> byte_offset() const { return byte_offset_; }
    std::optional<std::size_t> line() const { return line_; }

private:
    std::optional<std::size_t> byte_offset_;
    std::optional<std::size_t> line_;
};

/// A computation hit a degenerate configuration (rank-deficient PCA,
/// vertex behind the source, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace cephreg
