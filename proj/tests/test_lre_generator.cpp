#include <gtest/gtest.h>

#include <random>

#include "ielre/lre_generator.hpp"

using namespace ielre;

namespace {

GeneratorConfig ct_cfg(Real mu, Real beta) { return {mu, beta, 0.1, 0.01, Mode::CT}; }
GeneratorConfig dt_cfg(Real T = 0.01) { return {0.4, 0.75, 0.1, T, Mode::DT}; }

GeneratorState with(std::array<Real, 2> phi, Real z = 0.0) {
    GeneratorState s;
    s.Phi = phi;
    s.z = z;
    return s;
}

void expect_u(const ControlSignals& u, std::array<double, 4> want) {
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(static_cast<double>(u[i]), want[i], 1e-15) << i;
}

}  // namespace

TEST(TildeV, Examples) {
    EXPECT_NEAR(static_cast<double>(tilde_v({1, 0}, 0.51)), -0.01, 1e-15);
    EXPECT_EQ(tilde_v({0, 0}, 0.75), -0.75);
    EXPECT_NEAR(static_cast<double>(tilde_v({1, std::sqrt(Real(0.5))}, 0.75)), 0.0, 1e-15);
}

TEST(ControlCt, Examples) {
    expect_u(control_signals_ct(with({1, 0}), 0.0, ct_cfg(0.4, 0.75)), {0, 0.4, 0.25, 0});
    expect_u(control_signals_ct(with({0, 0}), 0.0, ct_cfg(0.4, 0.75)), {0, 0, 0.75, 0});
    expect_u(control_signals_ct(with({1, 0}, 1.0), 1.0, ct_cfg(1.0, 0.51)), {-1, 1, 0.01, -1.01});
    EXPECT_THROW(control_signals_ct(with({1, 0}), 0.0, dt_cfg()), KindMismatch);
}

TEST(ControlDt, Examples) {
    expect_u(control_signals_dt(with({1, 0}), 1.0, dt_cfg()), {-0.004, 0.004, 1.0025, 0});
    EXPECT_EQ(control_signals_dt(with({0.3, 0.9}), 1.0, dt_cfg())[3], 0.0);
    const auto u = control_signals_dt(with({0, 0}, 2.0), 1.0, dt_cfg());
    EXPECT_EQ(u[0], 0.0);
    EXPECT_EQ(u[1], 0.0);
    EXPECT_THROW(control_signals_dt(with({1, 0}), 0.0, ct_cfg(1, 1)), KindMismatch);
}

TEST(GeneratorCt, InitialStateAtRest) {
    const auto d = generator_rhs_ct(GeneratorState::initial(), {0, 0}, ct_cfg(0.4, 0.75));
    EXPECT_EQ(d.z, 0.0);
    EXPECT_EQ(d.xi[0], 0.0);
    EXPECT_EQ(d.xi[1], 0.0);
    EXPECT_EQ(d.Phi[0], 0.0);
    EXPECT_EQ(d.Phi[1], 0.0);
}

TEST(GeneratorCt, PumpingFromRest) {
    const auto d = generator_rhs_ct(with({1, 0}), {0, 1}, ct_cfg(1.0, 0.75));
    EXPECT_EQ(d.Phi[0], 0.0);
    EXPECT_EQ(d.Phi[1], 1.0);
}

TEST(GeneratorCt, ClosedLoopForm) {
    // Phi1' = -mu delta Phi2 Phi1, Phi2' = mu delta Phi1^2 - Vtilde Phi2, z' = -mu z + mu Phi1 caly,
    // and d/dt Vtilde = -Phi2^2 Vtilde by the chain rule.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const Real mu = 0.1 + 5 * u(rng), beta = 0.51 + u(rng), delta = 2 * u(rng), caly = 4 * u(rng) - 2;
        const GeneratorState s = with({u(rng), u(rng)}, 2 * u(rng) - 1);
        const auto cfg = ct_cfg(mu, beta);
        const auto d = generator_rhs_ct(s, {caly, delta}, cfg);
        const Real v = tilde_v(s.Phi, beta);
        const auto [p1, p2] = s.Phi;
        EXPECT_NEAR(static_cast<double>(d.Phi[0]), static_cast<double>(-mu * delta * p2 * p1), 1e-14);
        EXPECT_NEAR(static_cast<double>(d.Phi[1]), static_cast<double>(mu * delta * p1 * p1 - v * p2), 1e-14);
        EXPECT_NEAR(static_cast<double>(d.z), static_cast<double>(-mu * s.z + mu * p1 * caly), 1e-14);
        const Real dv = p1 * d.Phi[0] + p2 * d.Phi[1];
        EXPECT_NEAR(static_cast<double>(dv), static_cast<double>(-p2 * p2 * v), 1e-14);
    }
}

TEST(GeneratorDt, Examples) {
    const auto a = generator_step_dt(with({1, 0}), {5, 1}, dt_cfg());
    EXPECT_EQ(a.Phi[0], 1.0);
    EXPECT_NEAR(static_cast<double>(a.Phi[1]), 0.004, 1e-15);

    const auto b = generator_step_dt(with({1, 0}, 1.0), {0, 1}, dt_cfg());
    EXPECT_NEAR(static_cast<double>(b.z), 0.9, 1e-15);

    const auto c = generator_step_dt(with({0.7, 0.2}), {3, 0.5}, dt_cfg());
    EXPECT_EQ(c.xi[0], 0.0);
    EXPECT_EQ(c.xi[1], 0.0);
    EXPECT_THROW(generator_step_dt(with({1, 0}), {0, 1}, ct_cfg(1, 1)), KindMismatch);
}

TEST(GeneratorDt, StructuralIdentity) {
    // x = xi + Phi theta has x1 = theta and x2 = z at every step, so Y2 = Phi2 theta exactly.
    const Real theta = 5.0;
    GeneratorState s = GeneratorState::initial();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Real delta = u(rng);
        const ScalarLre lre{delta * theta, delta};
        const auto nl = read_new_lre(s, lre);
        ASSERT_NEAR(static_cast<double>(s.xi[0] + s.Phi[0] * theta), 5.0, 1e-10) << k;
        ASSERT_NEAR(static_cast<double>(nl.Y2 - nl.Phi2 * theta), 0.0, 1e-10) << k;
        ASSERT_NEAR(static_cast<double>(nl.Y1 - delta * s.Phi[0] * theta), 0.0, 1e-10) << k;
        s = generator_step_dt(s, lre, dt_cfg());
    }
}

TEST(ReadNewLre, InitialState) {
    const auto nl = read_new_lre(GeneratorState::initial(), {0, 0});
    EXPECT_EQ(nl.Y2, 0.0);
    EXPECT_EQ(nl.Phi2, 0.0);
}

TEST(GeneratorConfigValidation, Domains) {
    EXPECT_TRUE(validate(dt_cfg()).empty());
    EXPECT_EQ(validate(dt_cfg(1.5)).size(), 1u);
    EXPECT_THROW(validate(GeneratorConfig{0.4, 0.5, 0.1, 0.01, Mode::DT}), DomainError);
    EXPECT_THROW(validate(GeneratorConfig{0.0, 0.75, 0.1, 0.01, Mode::DT}), DomainError);
    EXPECT_THROW(validate(GeneratorConfig{0.4, 0.75, 1.0, 0.01, Mode::DT}), DomainError);
    EXPECT_THROW(validate(GeneratorConfig{0.4, 0.75, 0.1, 0.0, Mode::DT}), DomainError);
    EXPECT_NO_THROW(validate(GeneratorConfig{0.4, 0.75, 5.0, 0.0, Mode::CT}));
}
