#pragma once

#include <stdexcept>
#include <string>

namespace pseudoheat {

/// Raised when an argument lies outside the mathematical domain of an operation
/// (y <= 0, D < 3, points off the upper sheet, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an adaptive integrator exhausts its subdivision budget with the
/// error estimate still above tolerance. Carries the best estimate reached.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double value, double err_est)
        : std::runtime_error(what), value_(value), err_est_(err_est) {}

    double value() const noexcept { return value_; }
    double err_est() const noexcept { return err_est_; }

private:
    double value_;
    double err_est_;
};

} // namespace pseudoheat
