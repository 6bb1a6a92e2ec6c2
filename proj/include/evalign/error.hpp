#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evalign {

/// Base for all errors raised by the library. The CLI maps subclasses onto
/// exit codes: IoError -> 1, ParseError/ValidationError -> 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Input is not syntactically well-formed (XML, JSON, TSV).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input is well-formed but violates a data-model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace evalign
