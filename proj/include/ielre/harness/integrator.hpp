#pragma once

#include <cstddef>
#include <utility>

#include "ielre/types.hpp"

namespace ielre {

/// One classical Runge-Kutta 4 step of x' = rhs(t, x).
///
/// Throws SimulationDiverged, tagged with `step_index`, when the new state is
/// not finite.
template <typename Rhs>
Vector integrate_rk4(Rhs&& rhs, const Vector& x, Real t, Real h, std::size_t step_index = 0) {
    if (!(h > 0.0)) throw DomainError("integrate_rk4: step must be positive");
    const Real half = 0.5 * h;
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + half, Vector(x + half * k1));
    const Vector k3 = rhs(t + half, Vector(x + half * k2));
    const Vector k4 = rhs(t + h, Vector(x + h * k3));
    Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw SimulationDiverged("integrate_rk4: non-finite state", step_index);
    return next;
}

}  // namespace ielre
