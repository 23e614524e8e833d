#include <gtest/gtest.h>

#include "ielre/harness/integrator.hpp"
#include "ielre/lti_plant.hpp"
#include "ielre/signals.hpp"

using namespace ielre;

namespace {

PlantConfig identification_plant_cfg() { return PlantConfig::second_order(2, 1, 1, 2, 100, 20); }

}  // namespace

TEST(TrueTheta, IdentificationExample) {
    const Vector th = true_theta(identification_plant_cfg());
    EXPECT_EQ(th, (Vector{{98, 19, 1, 2}}));
}

TEST(TrueTheta, FilterEqualsDenominator) {
    const auto c = PlantConfig::second_order(3, 4, 0, 0, 3, 4);
    EXPECT_EQ(true_theta(c), Vector::Zero(4));
}

TEST(TrueTheta, DirectSubstitution) {
    EXPECT_EQ(true_theta(PlantConfig::second_order(0, 0, 0, 0, 1, 1)), (Vector{{1, 1, 0, 0}}));
}

TEST(TrueTheta, LinearInB) {
    auto c = identification_plant_cfg();
    const Vector t1 = true_theta(c);
    c.b *= 2;
    const Vector t2 = true_theta(c);
    EXPECT_EQ(t2.head(2), t1.head(2));
    EXPECT_EQ(t2.tail(2), 2 * t1.tail(2));
}

TEST(PlantRhs, ZeroStateZeroInput) {
    const auto d = plant_rhs(PlantState::zero(2), identification_plant_cfg(), 0.0);
    EXPECT_EQ(d.x_plant, Vector::Zero(2));
    EXPECT_EQ(d.x_fu, Vector::Zero(2));
    EXPECT_EQ(d.x_fy, Vector::Zero(2));
}

TEST(PlantRhs, UnitInputCanonicalForm) {
    const auto d = plant_rhs(PlantState::zero(2), identification_plant_cfg(), 1.0);
    EXPECT_EQ(d.x_plant, (Vector{{0, 1}}));
    EXPECT_EQ(d.x_fu, (Vector{{0, 1}}));
    EXPECT_EQ(d.x_fy, Vector::Zero(2));
}

TEST(PlantRhs, MeasurementOffsetDrivesOutputFilterOnly) {
    const auto d = plant_rhs(PlantState::zero(2), identification_plant_cfg(), 0.0, 0.5);
    EXPECT_EQ(d.x_plant, Vector::Zero(2));
    EXPECT_EQ(d.x_fy, (Vector{{0, 0.5}}));
}

TEST(ReadSample, ZeroState) {
    const auto s = read_sample(PlantState::zero(2), identification_plant_cfg(), 0.0, 0.0);
    EXPECT_EQ(s.Y, 0.0);
    EXPECT_EQ(s.Omega, Vector::Zero(4));
    EXPECT_EQ(plant_output(PlantState::zero(2), identification_plant_cfg()), 0.0);
}

TEST(ReadSample, AdditiveNoise) {
    const auto s = read_sample(PlantState::zero(2), identification_plant_cfg(), 0.0, 0.3);
    EXPECT_NEAR(static_cast<double>(s.Y), 0.3, 1e-15);
    EXPECT_EQ(s.Omega, Vector::Zero(4));
}

TEST(ReadSample, OrderingIsOutputBlockFirst) {
    PlantState s = PlantState::zero(2);
    s.x_fy = Vector{{1, 2}};
    s.x_fu = Vector{{3, 4}};
    EXPECT_EQ(read_sample(s, identification_plant_cfg(), 0.0, 0.0).Omega, (Vector{{1, 2, 3, 4}}));
}

TEST(Plant, LreResidualAlongUpa) {
    const auto cfg = identification_plant_cfg();
    const Vector theta = true_theta(cfg);
    auto pack = [](const PlantState& p) {
        Vector x(6);
        x << p.x_plant, p.x_fu, p.x_fy;
        return x;
    };
    auto unpack = [](const Vector& x) -> PlantState { return {x.segment(0, 2), x.segment(2, 2), x.segment(4, 2)}; };
    auto rhs = [&](Real t, const Vector& x) { return pack(plant_rhs(unpack(x), cfg, eval_ct_signal(SignalKind::upa(), t))); };
    Vector x = Vector::Zero(6);
    const Real h = 1e-3;
    Real worst = 0.0, max_abs = 0.0;
    for (int k = 0; k < 5000; ++k) {
        x = integrate_rk4(rhs, x, k * h, h, k);
        const auto s = read_sample(unpack(x), cfg, (k + 1) * h, 0.0);
        worst = std::max(worst, std::abs(s.Y - s.Omega.dot(theta)));
        max_abs = std::max(max_abs, x.cwiseAbs().maxCoeff());
        if (k + 1 == 1000) {
            EXPECT_LE(std::abs(s.Y - s.Omega.dot(theta)), 1e-6);
        }
    }
    EXPECT_LE(worst, 1e-6);
    EXPECT_LT(max_abs, 1e3);
}

TEST(PlantConfigValidation, Hurwitz) {
    EXPECT_NO_THROW(validate(identification_plant_cfg()));
    EXPECT_THROW(validate(PlantConfig::second_order(1, 1, 1, 1, -1, 2)), DomainError);
    EXPECT_TRUE(is_hurwitz_monic(Vector{{6, 11, 6}}));   // (p+1)(p+2)(p+3)
    EXPECT_FALSE(is_hurwitz_monic(Vector{{10, 1, 1}}));  // p^3 + p^2 + p + 10
    PlantConfig bad = identification_plant_cfg();
    bad.b = Vector{{1}};
    EXPECT_THROW(validate(bad), DomainError);
}
