#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgbd {

// Base for every error raised by the library. Callers that only care about
// "something about the data was wrong" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class SingularRegressionError : public Error {
public:
    using Error::Error;
};

// Raised when an operation needs a monotone decreasing rank-size curve
// (a >= 0, b >= 0, not both zero) and the parameters are not.
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

}  // namespace dgbd
