#pragma once

#include <cstdint>
#include <string>

#include "ielre/harness/scenario.hpp"

namespace ielre::presets {

/// Plant (a0, a1, b0, b1) = (2, 1, 1, 2) with lambda(p) = p^2 + 20p + 100,
/// so theta = [98, 19, 1, 2].
inline PlantConfig identification_plant() { return PlantConfig::second_order(2.0, 1.0, 1.0, 2.0, 100.0, 20.0); }

/// Nominal KRE settings for the identification example.
inline constexpr Real kNominalKreGain = 100.0;
inline constexpr Real kKreLambda = 30.0;

/// KRE gain used by the shipped CT scenarios. det(Psi) scales like g^4; at
/// g = 100 it peaks near 1e-23 on this plant, too small for the DREM and
/// generator dynamics to react within any practical horizon. This gain
/// brings its peak to O(1) without touching the filter dynamics.
inline constexpr Real kCtKreGain = 5e7;

/// Generator rate for the CT scenarios; z' = -mu z + mu Phi1 caly must stay
/// well inside the RK4 stability region at h = 1e-3.
inline constexpr Real kCtGeneratorMu = 10.0;
inline constexpr Real kCtGeneratorBeta = 0.51;

inline constexpr Real kUpaHorizon = 50.0;
inline constexpr Real kUpbHorizon = 100.0;

/// CT identification run with all three estimators at the nominal estimator gains.
inline ScenarioConfig ct_identification(const SignalKind& input, const std::string& name = "") {
    ScenarioConfig c;
    c.mode = Mode::CT;
    c.name = name.empty() ? "ct-" + to_string(input) : name;
    c.plant = identification_plant();
    c.input = input;
    c.kre = {kCtKreGain, kKreLambda, 0.5, Mode::CT};
    c.generator = {kCtGeneratorMu, kCtGeneratorBeta, 0.1, 0.0, Mode::CT};
    c.estimators.grad_gain = 100.0 * Vector{{100.0, 50.0, 30.0, 10.0}};
    c.estimators.drem_gain = Vector::Ones(4);
    c.estimators.newlre_gain = Vector::Ones(4);
    c.h = 1e-3;
    c.t_end = input.tag == SignalTag::Upb ? kUpbHorizon : kUpaHorizon;
    c.convergence_tol = 0.02;
    return c;
}

inline constexpr Real kNoiseAmplitude = 0.1;
inline constexpr std::uint64_t kNoiseSeed = 1;

/// Step for noisy CT runs. Noise is drawn once per step, so its power in the
/// filter band grows with h; at h = 1e-3 and amplitude 0.1 the noise-driven
/// det(Psi) makes the DREM estimator stiffer than RK4 can follow.
inline constexpr Real kNoisyStep = 1e-4;

/// u_pb identification with bounded uniform output noise.
inline ScenarioConfig ct_noisy(Real amplitude = kNoiseAmplitude, std::uint64_t seed = kNoiseSeed) {
    ScenarioConfig c = ct_identification(SignalKind::upb(), "ct-upb-noisy");
    c.noise = NoiseSpec::uniform(amplitude, seed);
    c.h = kNoisyStep;
    return c;
}

/// DT scalar experiment with theta = 5, beta = 3/4, mu = 0.4, b = 0.1.
inline ScenarioConfig dt_scalar(const SignalKind& delta, Real T = 0.01, Real gamma = 0.1,
                                long long k_end = 5000) {
    ScenarioConfig c;
    c.mode = Mode::DT;
    c.name = "dt-" + to_string(delta) + "-T" + format_g(T, 6) + "-gamma" + format_g(gamma, 6);
    c.input = delta;
    c.generator = {0.4, 0.75, 0.1, T, Mode::DT};
    c.estimators.gamma = gamma;
    c.theta = 5.0;
    c.k_end = k_end;
    c.convergence_tol = 0.05;
    return c;
}

}  // namespace ielre::presets
