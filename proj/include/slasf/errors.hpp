#pragma once

#include <stdexcept>
#include <string>

namespace slasf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data: bad JSON, shape mismatch, rank deficiency, uncontrollable pair.
// `subsystem` is 1-based, or 0 when the error is not tied to a subsystem.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, int subsystem = 0)
        : Error(what), subsystem_(subsystem) {}

    int subsystem() const noexcept { return subsystem_; }

private:
    int subsystem_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace slasf
