#pragma once

#include <array>
#include <string>
#include <vector>

#include "ielre/kre_drem.hpp"
#include "ielre/types.hpp"

namespace ielre {

/// Tuning of the LRE generator with the pumping-and-damping signals.
///
/// mu > 0 and beta > 1/2 in both domains. The DT recursion additionally uses
/// the damping b_damp in (0,1) and the step constant T > 0; its invariants
/// hold only up to O(T^2).
struct GeneratorConfig {
    Real mu = 0.4;
    Real beta = 0.75;
    Real b_damp = 0.1;
    Real T = 0.01;
    Mode mode = Mode::DT;
};

/// Above this T the O(T^2) terms of the DT recursion are no longer small.
inline constexpr Real kLargeStepWarning = 0.5;

/// Throws on parameters outside their domain; returns advisory warnings.
inline std::vector<std::string> validate(const GeneratorConfig& cfg) {
    if (!(cfg.mu > 0.0)) throw DomainError("GeneratorConfig: mu must be positive");
    if (!(cfg.beta > 0.5)) throw DomainError("GeneratorConfig: beta must exceed 1/2");
    std::vector<std::string> warnings;
    if (cfg.mode == Mode::DT) {
        if (!(cfg.b_damp > 0.0 && cfg.b_damp < 1.0)) throw DomainError("GeneratorConfig: b must lie in (0,1)");
        if (!(cfg.T > 0.0)) throw DomainError("GeneratorConfig: T must be positive");
        if (cfg.T > kLargeStepWarning)
            warnings.push_back("T = " + format_g(cfg.T, 6) + " is large; the disk invariants may not hold");
    }
    return warnings;
}

/// Dynamic extension (z, xi, Phi) of one scalar regression.
struct GeneratorState {
    Real z = 0.0;
    std::array<Real, 2> xi{0.0, 0.0};
    std::array<Real, 2> Phi{1.0, 0.0};

    static GeneratorState initial() { return {}; }
};

/// New regressions read off the generator: Y2 = Phi2 * theta and, in DT,
/// Y1 = delta * Phi1 * theta.
struct NewLre {
    Real Y1 = 0.0;
    Real Y2 = 0.0;
    Real Phi2 = 0.0;
};

/// Vtilde = (Phi1^2 + Phi2^2)/2 - beta. Always recomputed from Phi.
inline Real tilde_v(const std::array<Real, 2>& Phi, Real beta) {
    return 0.5 * (Phi[0] * Phi[0] + Phi[1] * Phi[1]) - beta;
}

using ControlSignals = std::array<Real, 4>;

/// u = (-mu*delta*Phi1, mu*Phi1, -Vtilde, (Vtilde - mu) z).
inline ControlSignals control_signals_ct(const GeneratorState& s, Real delta, const GeneratorConfig& cfg) {
    require_mode(cfg.mode, Mode::CT, "control_signals_ct");
    const Real v = tilde_v(s.Phi, cfg.beta);
    const Real p1 = s.Phi[0];
    return {-cfg.mu * delta * p1, cfg.mu * p1, -v, (v - cfg.mu) * s.z};
}

/// u = (-T*mu*delta*Phi1, T*mu*Phi1, 1 - T*Vtilde, (T*Vtilde - b) z).
inline ControlSignals control_signals_dt(const GeneratorState& s, Real delta, const GeneratorConfig& cfg) {
    require_mode(cfg.mode, Mode::DT, "control_signals_dt");
    const Real v = tilde_v(s.Phi, cfg.beta);
    const Real tm = cfg.T * cfg.mu;
    const Real p1 = s.Phi[0];
    return {-tm * delta * p1, tm * p1, 1.0 - cfg.T * v, (cfg.T * v - cfg.b_damp) * s.z};
}

namespace detail {

// d[z] = u2 caly + u3 z + u4,  d[xi] = A xi + b,  d[Phi] = A Phi
// with A = [[a11, u1], [u2 delta, u3]] and b = (-u1 z, u4).
inline GeneratorState apply_extension(const GeneratorState& s, const ScalarLre& lre, const ControlSignals& u,
                                      Real a11) {
    const auto [u1, u2, u3, u4] = u;
    const Real a21 = u2 * lre.delta;
    GeneratorState out;
    out.z = u2 * lre.caly + u3 * s.z + u4;
    out.xi = {a11 * s.xi[0] + u1 * s.xi[1] - u1 * s.z, a21 * s.xi[0] + u3 * s.xi[1] + u4};
    out.Phi = {a11 * s.Phi[0] + u1 * s.Phi[1], a21 * s.Phi[0] + u3 * s.Phi[1]};
    return out;
}

}  // namespace detail

/// Time derivative of the CT generator (A11 = 0). The Phi part reduces to
/// Phi1' = -mu*delta*Phi2*Phi1, Phi2' = mu*delta*Phi1^2 - Vtilde*Phi2, and
/// z' = -mu z + mu Phi1 caly.
inline GeneratorState generator_rhs_ct(const GeneratorState& s, const ScalarLre& lre, const GeneratorConfig& cfg) {
    return detail::apply_extension(s, lre, control_signals_ct(s, lre.delta, cfg), 0.0);
}

/// One DT step (A11 = 1). z(k+1) = (1 - b) z(k) + T mu Phi1(k) caly(k).
inline GeneratorState generator_step_dt(const GeneratorState& s, const ScalarLre& lre, const GeneratorConfig& cfg) {
    return detail::apply_extension(s, lre, control_signals_dt(s, lre.delta, cfg), 1.0);
}

/// Y1 = caly - delta*xi1 and Y2 = z - xi2. Y1 is only meaningful in DT.
inline NewLre read_new_lre(const GeneratorState& s, const ScalarLre& lre) {
    return {lre.caly - lre.delta * s.xi[0], s.z - s.xi[1], s.Phi[1]};
}

}  // namespace ielre
