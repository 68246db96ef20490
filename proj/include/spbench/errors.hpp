#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spbench {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A format conversion declined because the result would be too large.
class ConversionRefused : public Error {
public:
    using Error::Error;
};

/// Raised when two keyed result sets do not line up. `missing()` lists the
/// offending keys in a printable form.
class KeyMismatch : public Error {
public:
    explicit KeyMismatch(std::vector<std::string> missing);

    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

enum class ParseErrorKind {
    bad_banner,
    unsupported_header,
    bad_size_line,
    bad_token,
    index_out_of_bounds,
    count_mismatch,
    truncated,
    io,
    schema_mismatch,
};

const char* to_string(ParseErrorKind kind) noexcept;

/// Error while reading a text input (Matrix Market or CSV). `line()` is
/// 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::size_t line, const std::string& what);

    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    ParseErrorKind kind_;
    std::size_t line_;
};

}  // namespace spbench
