#pragma once

#include <stdexcept>
#include <string>

namespace beamsafe {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input lies outside the tabulated exposure-limit domain (wavelength, duration).
class UnsupportedDomainError : public Error {
public:
    UnsupportedDomainError(const std::string& bound, const std::string& what)
        : Error(what), bound_(bound) {}

    const std::string& bound() const { return bound_; }

private:
    std::string bound_;
};

// A numerical kernel failed to converge. Carries the partial result.
class NumericsError : public Error {
public:
    NumericsError(const std::string& what, double partial_value, double residual)
        : Error(what), partial_value_(partial_value), residual_(residual) {}

    double partial_value() const { return partial_value_; }
    double residual() const { return residual_; }

private:
    double partial_value_;
    double residual_;
};

// Cq + D vanished in a bilinear q transform.
class FocalSingularityError : public NumericsError {
public:
    explicit FocalSingularityError(const std::string& what) : NumericsError(what, 0.0, 0.0) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ParameterError(message);
}

} // namespace detail
} // namespace beamsafe
