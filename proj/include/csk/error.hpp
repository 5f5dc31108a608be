#pragma once

#include <stdexcept>
#include <string>

namespace csk {

/// Base class for all csk errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument values (bad shapes requested, bad parameters, ...).
class ValueError : public Error {
public:
    explicit ValueError(const std::string& msg) : Error(msg) {}
};

/// Operand shape disagreement; message names both shapes.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// File and serialization failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Numerical breakdown (singular systems, step-size underflow, ...).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Experiment/config file problems; messages carry line numbers where known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace csk
