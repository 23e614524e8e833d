#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ielre/ielre.hpp"

using namespace ielre;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path temp_csv(const std::string& stem) {
    return std::filesystem::temp_directory_path() / ("ielre_test_" + stem + ".csv");
}

ScenarioConfig short_ct(const SignalKind& input, Real t_end = 1.0) {
    auto c = presets::ct_identification(input);
    c.t_end = t_end;
    return c;
}

}  // namespace

TEST(Rk4, ExponentialDecay) {
    auto rhs = [](Real, const Vector& x) { return Vector(-x); };
    Vector x{{1.0}};
    for (int k = 0; k < 100; ++k) x = integrate_rk4(rhs, x, k * 1e-3, 1e-3, k);
    EXPECT_NEAR(static_cast<double>(x[0]), 0.90483742, 1e-7);
}

TEST(Rk4, ConstantRhsIsExact) {
    auto rhs = [](Real, const Vector& x) { return Vector(Vector::Constant(x.size(), 2.0)); };
    const Vector x = integrate_rk4(rhs, Vector{{1.0, -1.0}}, 0.0, 0.25);
    EXPECT_EQ(x[0], 1.5);
    EXPECT_EQ(x[1], -0.5);
}

TEST(Rk4, NonFiniteTagsStep) {
    auto rhs = [](Real, const Vector& x) { return Vector(Vector::Constant(x.size(), std::numeric_limits<Real>::infinity())); };
    try {
        integrate_rk4(rhs, Vector{{0.0}}, 0.0, 1e-3, 42);
        FAIL() << "expected SimulationDiverged";
    } catch (const SimulationDiverged& e) {
        EXPECT_EQ(e.step_index, 42u);
    }
    EXPECT_THROW(integrate_rk4(rhs, Vector{{0.0}}, 0.0, 0.0), DomainError);
}

TEST(Noise, NoneAndZeroAmplitude) {
    for (std::uint64_t k = 0; k < 100; ++k) {
        EXPECT_EQ(make_noise(NoiseSpec::none(), k), 0.0);
        EXPECT_EQ(make_noise(NoiseSpec::uniform(0.0, 7), k), 0.0);
    }
}

TEST(Noise, UniformRangeAndMoments) {
    const auto spec = NoiseSpec::uniform(0.1, 1);
    Real lo = 1, hi = -1, sum = 0, sq = 0;
    const std::uint64_t n = 1000000;
    for (std::uint64_t k = 0; k < n; ++k) {
        const Real v = make_noise(spec, k);
        ASSERT_LE(std::abs(v), 0.1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        sq += v * v;
    }
    EXPECT_LT(lo, -0.0999);
    EXPECT_GT(hi, 0.0999);
    EXPECT_NEAR(static_cast<double>(sum / n), 0.0, 1e-3);
    EXPECT_NEAR(static_cast<double>(sq / n), 0.01 / 3, 1e-4);
}

TEST(Noise, DependsOnlyOnSeedAndIndex) {
    const auto a = NoiseSpec::uniform(0.1, 3), b = NoiseSpec::uniform(0.1, 4);
    int same = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        EXPECT_EQ(make_noise(a, k), make_noise(a, k));
        same += make_noise(a, k) == make_noise(b, k);
    }
    EXPECT_LT(same, 5);
}

TEST(CtRun, ZeroInputLeavesEverythingAtRest) {
    auto c = short_ct(SignalKind::constant(0.0), 0.5);
    const auto rec = run_ct_scenario(c);
    for (const auto& name : {"theta_hat_grad_1", "theta_hat_drem_4", "theta_hat_newlre_2", "delta", "z_3"})
        for (Real v : rec.series(name)) ASSERT_EQ(v, 0.0) << name;
    const auto& s = rec.summary;
    EXPECT_EQ(s.max_lre_residual, 0.0);
    EXPECT_EQ(s.invariant_violations(), 0u);
    for (const auto& g : s.final_generators) {
        EXPECT_EQ(g.Phi[0], 1.0);
        EXPECT_EQ(g.Phi[1], 0.0);
    }
}

TEST(CtRun, ShortUpaHoldsIdentities) {
    const auto rec = run_ct_scenario(short_ct(SignalKind::upa(), 2.0));
    const auto& s = rec.summary;
    EXPECT_LE(s.max_lre_residual, acceptance::kIdentityTol);
    EXPECT_LE(s.max_mix_residual, acceptance::kIdentityTol);
    EXPECT_LE(s.max_newlre_residual, acceptance::kIdentityTol);
    EXPECT_GE(s.min_raw_delta, -kDeltaNegativeTolerance);
    EXPECT_EQ(s.invariant_violations(), 0u);
    EXPECT_EQ(s.steps, 2000u);
}

TEST(CtRun, RejectsBadConfigs) {
    auto c = short_ct(SignalKind::upa());
    c.h = 0;
    EXPECT_THROW(run_ct_scenario(c), DomainError);
    c = short_ct(SignalKind::delta_a());
    EXPECT_THROW(run_ct_scenario(c), KindMismatch);
    c = short_ct(SignalKind::upa());
    c.estimators.grad_gain = Vector::Ones(3);
    EXPECT_ANY_THROW(run_ct_scenario(c));
    EXPECT_THROW(run_dt_scenario(short_ct(SignalKind::upa())), KindMismatch);
}

TEST(DtRun, ZeroDeltaFreezesEstimates) {
    auto c = presets::dt_scalar(SignalKind::constant(0.0), 0.01, 0.1, 200);
    const auto rec = run_dt_scenario(c);
    for (Real v : rec.series("theta_hat_ori_1")) ASSERT_EQ(v, 0.0);
    for (Real v : rec.series("theta_hat_new_1")) ASSERT_EQ(v, 0.0);
    for (Real v : rec.series("phi1_1")) ASSERT_EQ(v, 1.0);
    EXPECT_EQ(rec.rows.size(), 201u);
}

TEST(DtRun, NewLreResidualAtRoundoff) {
    for (char d : {'a', 'b', 'c', 'd'}) {
        const auto rec = run_dt_scenario(presets::dt_scalar(*parse_signal(std::string(1, d))));
        EXPECT_LE(rec.summary.max_newlre_residual, acceptance::kDtResidualTol) << d;
    }
}

TEST(DtRun, UnstableRunIsRecorded) {
    auto c = presets::dt_scalar(SignalKind::delta_d(), 1.5, 1.6);
    c.invariant_slack = 1e-12;
    c.expect_divergence = true;
    const auto rec = run_dt_scenario(c);
    const auto& s = rec.summary;
    EXPECT_TRUE(s.diverged || s.estimators.at("new").max_abs_estimate > acceptance::kBlowUp);
    EXPECT_GT(s.invariant_violations(), 0u);
}

TEST(Csv, ByteIdenticalAcrossRunsWithHeader) {
    auto c = presets::dt_scalar(SignalKind::delta_b(), 0.01, 0.1, 300);
    const auto p1 = temp_csv("a"), p2 = temp_csv("b");
    c.out_path = p1.string();
    run_dt_scenario(c);
    c.out_path = p2.string();
    run_dt_scenario(c);
    const std::string a = slurp(p1), b = slurp(p2);
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, b);

    std::istringstream in(a);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, "# ielre scenario " + c.name);
    ASSERT_EQ(l2.rfind("# config ", 0), 0u);
    const auto j = nlohmann::json::parse(l2.substr(9));
    EXPECT_EQ(j["mode"], "DT");
    EXPECT_EQ(j["input"], "b");
    EXPECT_EQ(l3, "k,theta_hat_ori_1,theta_hat_new_1,err_ori,err_new,phi1_1,phi2_1,vtilde_1,delta,y2_1,z_1");
    std::size_t data = 0;
    for (std::string line; std::getline(in, line);) ++data;
    EXPECT_EQ(data, 301u);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST(Csv, CtColumns) {
    auto c = short_ct(SignalKind::upa(), 0.05);
    c.estimators.grad = false;
    const auto rec = run_ct_scenario(c);
    EXPECT_EQ(rec.columns.front(), "t");
    EXPECT_THROW((void)rec.column("err_grad"), std::out_of_range);
    EXPECT_NO_THROW((void)rec.column("err_drem"));
    EXPECT_NO_THROW((void)rec.column("phi2_4"));
    EXPECT_EQ(rec.rows.size(), 51u);
}

TEST(FaultInjection, TripsNonNegativeDeltaCheck) {
    auto clean = short_ct(SignalKind::upa(), 0.2);
    clean.name = "short";
    acceptance::RunCache ok({clean});
    EXPECT_TRUE(acceptance::p1_nonnegative_delta(ok).pass);

    auto bad = clean;
    bad.fault = {-1e-6, true};
    acceptance::RunCache broken({bad});
    const auto r = acceptance::p1_nonnegative_delta(broken);
    EXPECT_FALSE(r.pass);
    EXPECT_LT(broken.get("short").rec.summary.min_raw_delta, -kDeltaNegativeTolerance);
}

TEST(Profile, Parsing) {
    EXPECT_EQ(parse_profile("quick"), Profile::Quick);
    EXPECT_EQ(parse_profile("full"), Profile::Full);
    EXPECT_FALSE(parse_profile(""));
    EXPECT_FALSE(parse_profile("Quick"));
}

TEST(Shipped, NamesAreUniqueAndCoverGrid) {
    const auto cfgs = acceptance::shipped_scenarios();
    std::set<std::string> names;
    for (const auto& c : cfgs) names.insert(c.name);
    EXPECT_EQ(names.size(), cfgs.size());
    EXPECT_EQ(cfgs.size(), 3u + 12u + 1u);
    EXPECT_TRUE(names.count(acceptance::dt_name('b', 0.1)));
    EXPECT_TRUE(names.count(acceptance::kUnstableRun));
}

TEST(Oracle, LeibnizMatchesCofactor) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 200; ++t) {
        Matrix m(5, 5);
        for (Eigen::Index i = 0; i < 25; ++i) m(i) = u(rng);
        EXPECT_NEAR(static_cast<double>(determinant(m)), static_cast<double>(acceptance::leibniz_det(m)), 1e-12);
    }
}
