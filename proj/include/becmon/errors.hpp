#pragma once

#include <stdexcept>
#include <string>

namespace becmon {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument to a library call (non-positive mass, unknown beta, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// A branch frequency is imaginary or too close to zero: the potential has
// turned into a repeller and the branch cannot be propagated.
class BreakupRegime : public Error {
public:
    BreakupRegime(const std::string& what, long branch_index, double epsilon)
        : Error(what), branch_index_(branch_index), epsilon_(epsilon) {}

    long branch_index() const noexcept { return branch_index_; }
    double epsilon() const noexcept { return epsilon_; }

private:
    long branch_index_;
    double epsilon_;
};

class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(const std::string& what, double est_error)
        : Error(what), est_error_(est_error) {}

    double est_error() const noexcept { return est_error_; }

private:
    double est_error_;
};

// Malformed scenario document. key_path names the offending key.
class SchemaError : public Error {
public:
    SchemaError(const std::string& key_path, const std::string& reason)
        : Error(key_path.empty() ? reason : key_path + ": " + reason), key_path_(key_path) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

// Requested evaluation method cannot run on the requested ensemble/case.
class IncompatibleMethod : public SchemaError {
public:
    IncompatibleMethod(const std::string& method, const std::string& reason)
        : SchemaError("method", method + ": " + reason) {}
};

}  // namespace becmon
