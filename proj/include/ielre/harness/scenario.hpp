#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ielre/estimators.hpp"
#include "ielre/harness/noise.hpp"
#include "ielre/kre_drem.hpp"
#include "ielre/lre_generator.hpp"
#include "ielre/lti_plant.hpp"
#include "ielre/signals.hpp"

namespace ielre {

/// Which estimators a run drives, and their diagonal gains.
///
/// CT runs use grad (vector gradient on Y = Omega^T theta), drem (scalar
/// gradient on caly_i = delta theta_i) and newlre (scalar gradient on the
/// generator output). DT runs always drive the scalar pair "ori" and "new",
/// both with gain `gamma`.
struct EstimatorSelection {
    bool grad = true;
    bool drem = true;
    bool newlre = true;
    Vector grad_gain;
    Vector drem_gain;
    Vector newlre_gain;
    Real gamma = 0.1;
};

/// Test-only perturbation of det(Psi); the default leaves runs untouched.
struct FaultInjection {
    Real delta_offset = 0.0;
    bool disable_clamp = false;
};

struct ScenarioConfig {
    std::string name;
    Mode mode = Mode::CT;
    PlantConfig plant;  // CT only
    SignalKind input;   // plant input (CT) or delta(k) (DT)
    KreConfig kre;      // CT only
    GeneratorConfig generator;
    EstimatorSelection estimators;
    Real h = 1e-3;      // CT integration step
    Real t_end = 50.0;  // CT horizon
    long long k_end = 5000;
    Real theta = 5.0;  // DT true parameter
    NoiseSpec noise;
    std::string out_path;
    std::size_t record_stride = 1;
    bool expect_divergence = false;
    std::optional<Real> invariant_slack;
    Real state_cap = 1e12;
    Real convergence_tol = 0.05;
    bool keep_regressor = false;
    FaultInjection fault;

    [[nodiscard]] Real T() const { return generator.T; }
};

/// Residual tolerance for the CT identities at step h: 1e-6 at h = 1e-3,
/// scaled like h^4.
inline Real tol_int(Real h) { return 1e-6 * std::pow(h / 1e-3, 4); }

/// Slack used by the Phi invariant checks. CT: 1e-6. DT: 10 T^2 (the
/// recursion is only invariant up to O(T^2)), never below 1e-12.
inline Real invariant_slack(const ScenarioConfig& cfg) {
    if (cfg.invariant_slack) return *cfg.invariant_slack;
    if (cfg.mode == Mode::CT) return 1e-6;
    return std::max<Real>(1e-12, 10.0 * cfg.T() * cfg.T());
}

/// Extremes and violation counts of the Phi-trajectory properties of one
/// generator: Vtilde <= 0 and non-decreasing, 1 <= |Phi|^2 <= 2 beta,
/// Phi1 non-increasing in [0,1], Phi2 non-decreasing and >= 0.
struct InvariantStats {
    Real max_vtilde = -std::numeric_limits<Real>::infinity();
    Real max_vtilde_drop = 0.0;
    Real min_radius2 = std::numeric_limits<Real>::infinity();
    Real max_radius2 = -std::numeric_limits<Real>::infinity();
    Real min_phi1 = std::numeric_limits<Real>::infinity();
    Real max_phi1 = -std::numeric_limits<Real>::infinity();
    Real max_phi1_rise = 0.0;
    Real min_phi2 = std::numeric_limits<Real>::infinity();
    Real max_phi2_drop = 0.0;
    std::size_t disk = 0;
    std::size_t vtilde_monotone = 0;
    std::size_t annulus = 0;
    std::size_t phi1 = 0;
    std::size_t phi2 = 0;

    [[nodiscard]] std::size_t violations() const { return disk + vtilde_monotone + annulus + phi1 + phi2; }

    void observe(const GeneratorState* prev, const GeneratorState& cur, Real beta, Real slack) {
        const Real v = tilde_v(cur.Phi, beta);
        const Real r2 = cur.Phi[0] * cur.Phi[0] + cur.Phi[1] * cur.Phi[1];
        max_vtilde = std::max(max_vtilde, v);
        min_radius2 = std::min(min_radius2, r2);
        max_radius2 = std::max(max_radius2, r2);
        min_phi1 = std::min(min_phi1, cur.Phi[0]);
        max_phi1 = std::max(max_phi1, cur.Phi[0]);
        min_phi2 = std::min(min_phi2, cur.Phi[1]);
        if (v > slack) ++disk;
        if (r2 < 1.0 - slack || r2 > 2.0 * beta + slack) ++annulus;
        if (cur.Phi[0] < -slack || cur.Phi[0] > 1.0 + slack) ++phi1;
        if (cur.Phi[1] < -slack) ++phi2;
        if (prev) {
            const Real drop_v = tilde_v(prev->Phi, beta) - v;
            const Real rise_1 = cur.Phi[0] - prev->Phi[0];
            const Real drop_2 = prev->Phi[1] - cur.Phi[1];
            max_vtilde_drop = std::max(max_vtilde_drop, drop_v);
            max_phi1_rise = std::max(max_phi1_rise, rise_1);
            max_phi2_drop = std::max(max_phi2_drop, drop_2);
            if (drop_v > slack) ++vtilde_monotone;
            if (rise_1 > slack) ++phi1;
            if (drop_2 > slack) ++phi2;
        }
    }
};

struct EstimatorSummary {
    Real final_error = 0.0;  // |theta_hat - theta| at the last step
    Real final_rel_error = 0.0;
    Real half_error = 0.0;  // at half the horizon
    Real min_error = std::numeric_limits<Real>::infinity();
    Real max_abs_estimate = 0.0;
    std::optional<std::size_t> first_below_tol;  // step index
};

struct RunSummary {
    std::size_t steps = 0;
    bool diverged = false;
    std::optional<std::size_t> diverged_step;
    std::string divergence_message;
    Real min_raw_delta = std::numeric_limits<Real>::infinity();
    Real max_delta = 0.0;
    Real max_abs_state = 0.0;
    bool state_bounded = true;
    Real max_lre_residual = 0.0;     // |Y - Omega^T theta|
    Real max_mix_residual = 0.0;     // |caly_i - delta theta_i| / (1 + |theta_i|)
    Real max_newlre_residual = 0.0;  // |Y2_i - Phi2_i theta_i| / (1 + |theta_i|)
    Real slack = 0.0;
    std::map<std::string, EstimatorSummary> estimators;
    std::vector<InvariantStats> invariants;  // one per generator channel
    std::vector<GeneratorState> final_generators;

    [[nodiscard]] std::size_t invariant_violations() const {
        std::size_t n = 0;
        for (const auto& s : invariants) n += s.violations();
        return n;
    }
};

/// Recorded trajectory. `rows` follow `columns`; `regressor` holds Omega
/// at the same instants when the scenario asks to keep it.
struct RunRecord {
    std::vector<std::string> columns;
    std::vector<std::vector<Real>> rows;
    std::vector<Vector> regressor;
    RunSummary summary;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::out_of_range("RunRecord: no column " + name);
        return static_cast<std::size_t>(it - columns.begin());
    }

    [[nodiscard]] std::vector<Real> series(const std::string& name) const {
        const auto c = column(name);
        std::vector<Real> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

namespace detail {

inline nlohmann::json vec_json(const Vector& v) {
    auto a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace detail

/// Full configuration as JSON; embedded in every CSV written by a run.
inline nlohmann::json to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["name"] = c.name;
    j["mode"] = to_string(c.mode);
    j["input"] = to_string(c.input);
    j["generator"] = {{"mu", c.generator.mu}, {"beta", c.generator.beta}};
    if (c.mode == Mode::CT) {
        j["plant"] = {{"a", detail::vec_json(c.plant.a)},
                      {"b", detail::vec_json(c.plant.b)},
                      {"lambda", detail::vec_json(c.plant.lambda)}};
        j["kre"] = {{"g", c.kre.g}, {"lambda_f", c.kre.lambda_f}};
        auto est = nlohmann::json::object();
        if (c.estimators.grad) est["grad"] = detail::vec_json(c.estimators.grad_gain);
        if (c.estimators.drem) est["drem"] = detail::vec_json(c.estimators.drem_gain);
        if (c.estimators.newlre) est["newlre"] = detail::vec_json(c.estimators.newlre_gain);
        j["estimators"] = est;
        j["integrator"] = {{"method", "rk4"}, {"h", c.h}, {"t_end", c.t_end}};
    } else {
        j["generator"]["b"] = c.generator.b_damp;
        j["generator"]["T"] = c.generator.T;
        j["estimators"] = {{"ori", c.estimators.gamma}, {"new", c.estimators.gamma}};
        j["theta"] = c.theta;
        j["k_end"] = c.k_end;
    }
    j["noise"] = {{"kind", to_string(c.noise)}, {"amplitude", c.noise.amplitude}, {"seed", c.noise.seed}};
    j["record_stride"] = c.record_stride;
    if (c.fault.delta_offset != 0.0 || c.fault.disable_clamp)
        j["fault"] = {{"delta_offset", c.fault.delta_offset}, {"disable_clamp", c.fault.disable_clamp}};
    return j;
}

}  // namespace ielre
