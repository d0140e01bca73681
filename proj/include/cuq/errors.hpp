#pragma once

#include <stdexcept>
#include <string>

namespace cuq {

// Precondition violated by caller-supplied values.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or unphysical input data (files, measured observables).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Observables with no Bloch-sphere realisation.
class Unphysical : public DataError {
public:
    using DataError::DataError;
};

// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public NumericalError {
public:
    StepSizeUnderflow(const std::string& what, double tau, double step)
        : NumericalError(what), tau_(tau), step_(step) {}
    double tau() const noexcept { return tau_; }
    double step() const noexcept { return step_; }

private:
    double tau_;
    double step_;
};

}  // namespace cuq
