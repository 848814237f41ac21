#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smallgain {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed expression text.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& msg)
        : Error("syntax error at offset " + std::to_string(position) + ": " + msg),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Identifier not present in the declared variable schema.
class UnknownIdentifierError : public Error {
public:
    explicit UnknownIdentifierError(const std::string& name)
        : Error("unknown identifier '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Builtin called with the wrong number of arguments.
class ArityError : public Error {
public:
    ArityError(const std::string& fn, int expected, int got)
        : Error("function '" + fn + "' expects " + std::to_string(expected) +
                " argument(s), got " + std::to_string(got)),
          fn_(fn), expected_(expected), got_(got) {}
    const std::string& fn() const { return fn_; }
    int expected() const { return expected_; }
    int got() const { return got_; }

private:
    std::string fn_;
    int expected_;
    int got_;
};

/// Evaluation left the real domain: ln/sqrt of a negative number, division by
/// exact zero, or a NaN-producing power.
class DomainError : public Error {
public:
    DomainError(const std::string& node, std::size_t position)
        : Error("domain error in '" + node + "' at offset " + std::to_string(position)),
          node_(node), position_(position) {}
    const std::string& node() const { return node_; }
    std::size_t position() const { return position_; }

private:
    std::string node_;
    std::size_t position_;
};

/// Numerical inversion could not bracket the target value below the overflow
/// guard; in practice the function is not K-infinity.
class UnreachableError : public Error {
public:
    explicit UnreachableError(double y)
        : Error("value " + std::to_string(y) + " not reachable below the overflow guard"),
          y_(y) {}
    double y() const { return y_; }

private:
    double y_;
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

/// Rejection sampling found no member of the requested region.
class EmptyRegionError : public Error {
public:
    explicit EmptyRegionError(const std::string& what) : Error(what) {}
};

/// Operation requires a trajectory that did not blow up.
class TruncatedTrajectoryError : public Error {
public:
    TruncatedTrajectoryError() : Error("trajectory was truncated at blowup") {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Config failed schema validation; carries the offending JSON path.
class SchemaError : public Error {
public:
    SchemaError(const std::string& json_path, const std::string& msg)
        : Error("config error at " + json_path + ": " + msg), json_path_(json_path) {}
    const std::string& json_path() const { return json_path_; }

private:
    std::string json_path_;
};

}  // namespace smallgain
