#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oscdiff {

/// Inconsistent or degenerate problem setup (grid too coarse, bad geometry, bad keys).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A time step could not be completed; carries the achieved relative residual.
class StepError : public NumericError {
public:
    StepError(const std::string& what, double residual, std::size_t step = 0)
        : NumericError(what), residual_(residual), step_(step) {}

    double residual() const noexcept { return residual_; }
    std::size_t step() const noexcept { return step_; }

private:
    double residual_;
    std::size_t step_;
};

}  // namespace oscdiff
