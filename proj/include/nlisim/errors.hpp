#pragma once

#include <stdexcept>
#include <string>

namespace nlisim {

// Malformed input: config files, traces, flag values. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A physically meaningless request (negative power, empty interferometer, ...).
// The CLI maps this to exit code 3.
class PhysicsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The sinusoid fit could not be carried out on the supplied trace.
class FitError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw PhysicsError(message);
}

} // namespace detail
} // namespace nlisim
