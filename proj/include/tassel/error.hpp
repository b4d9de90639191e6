#pragma once

#include <stdexcept>
#include <string>

namespace tassel {

/// Broad failure category. The CLI maps each category onto a process exit code.
enum class ErrorKind {
    usage,     // bad invocation or configuration
    data,      // malformed input, schema or contract violation on data
    numeric,   // NaN/Inf or otherwise unusable numbers
    internal,  // broken invariant inside the library
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::usage: return 1;
            case ErrorKind::data: return 2;
            case ErrorKind::numeric: return 3;
            case ErrorKind::internal: return 3;
        }
        return 3;
    }

private:
    ErrorKind kind_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorKind::data, "shape error: " + w) {}
};

struct IndexError : Error {
    explicit IndexError(const std::string& w) : Error(ErrorKind::data, "index error: " + w) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::data, "schema error: " + w) {}
};

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& w)
        : Error(ErrorKind::data, "parse error at line " + std::to_string(line) + ": " + w), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ContractError : Error {
    explicit ContractError(const std::string& w) : Error(ErrorKind::data, "contract violation: " + w) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::usage, "configuration error: " + w) {}
};

struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& w) : Error(ErrorKind::usage, "unsupported operation: " + w) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, "numeric error: " + w) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& w) : Error(ErrorKind::internal, "internal error: " + w) {}
};

}  // namespace tassel
