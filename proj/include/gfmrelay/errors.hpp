#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfmrelay {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A phasor magnitude fell below the floor that marks a quantity as absent.
class ZeroPhasor : public Error {
public:
    using Error::Error;
};

class SingularNetwork : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::size_t iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}
    std::size_t iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

class OscillationDetected : public NoConvergence {
public:
    using NoConvergence::NoConvergence;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::string key = {})
        : Error(what), line_(line), key_(std::move(key)) {}
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& key, const std::string& what)
        : Error(key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gfmrelay
