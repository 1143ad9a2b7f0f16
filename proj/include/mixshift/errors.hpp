#pragma once

#include <stdexcept>
#include <string>

namespace mixshift {

// Error taxonomy maps onto CLI exit codes: configuration = 1, data = 2,
// numeric = 3.  Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 3; }
};

// Bad user input: unknown column, invalid fold count, malformed flag.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
    int exit_code() const override { return 1; }
};

// The file parsed but its contents are unusable (missing cell, constant
// outcome, degenerate exposure).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
    int exit_code() const override { return 2; }
};

// A computation failed: singular solve, non-convergent fluctuation,
// non-finite density ratio.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
    int exit_code() const override { return 3; }
};

// No admissible shift size satisfies the density-ratio bound.
class PositivityError : public NumericError {
public:
    explicit PositivityError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace mixshift
