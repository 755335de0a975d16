#pragma once

#include <stdexcept>
#include <string>

namespace flows4 {

// Exit-code mapping used by the runner: configuration 2, numerical 3, invariant 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegreeError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class SingularityError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class InvariantViolation : public Error { public: using Error::Error; };

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Carries the measured integral of a density that failed the unit-mass check.
class NormalizationError : public Error {
public:
    NormalizationError(const std::string& what, double measured)
        : Error(what), measured_(measured) {}
    double measured() const noexcept { return measured_; }

private:
    double measured_;
};

} // namespace flows4
