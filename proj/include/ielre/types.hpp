#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ielre {

using Real = long double;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Time domain of a filter, generator or scenario.
enum class Mode { CT, DT };

inline const char* to_string(Mode m) { return m == Mode::CT ? "CT" : "DT"; }

/// printf-style %.*Lg rendering.
inline std::string format_g(Real v, int digits = 17) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
    return buf;
}

/// A CT-only operation was handed DT data or vice versa.
struct KindMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input outside the domain of an operation (empty series, bad window, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A structural property that must hold by construction was broken.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// The integrated state became non-finite.
struct SimulationDiverged : std::runtime_error {
    SimulationDiverged(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_index(step) {}
    std::size_t step_index;
};

}  // namespace ielre
