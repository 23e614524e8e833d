#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ielre/estimators.hpp"
#include "ielre/harness/integrator.hpp"
#include "ielre/harness/noise.hpp"
#include "ielre/harness/scenario.hpp"
#include "ielre/kre_drem.hpp"
#include "ielre/lre_generator.hpp"
#include "ielre/lti_plant.hpp"
#include "ielre/signals.hpp"

namespace ielre {

namespace detail {

// Offsets of the blocks of the joint CT state vector:
// plant | F(p)u | F(p)y | Z | Psi (column-major) | (z, xi1, xi2, Phi1, Phi2) per channel | estimators
struct CtLayout {
    Eigen::Index n = 0, q = 0;
    Eigen::Index plant = 0, fu = 0, fy = 0, Z = 0, Psi = 0, gen = 0;
    Eigen::Index grad = -1, drem = -1, newlre = -1;
    Eigen::Index size = 0;

    CtLayout(Eigen::Index order, const EstimatorSelection& sel) : n(order), q(2 * order) {
        fu = n;
        fy = 2 * n;
        Z = 3 * n;
        Psi = Z + q;
        gen = Psi + q * q;
        Eigen::Index next = gen + 5 * q;
        if (sel.grad) grad = std::exchange(next, next + q);
        if (sel.drem) drem = std::exchange(next, next + q);
        if (sel.newlre) newlre = std::exchange(next, next + q);
        size = next;
    }

    [[nodiscard]] PlantState plant_state(const Vector& x) const {
        return {x.segment(plant, n), x.segment(fu, n), x.segment(fy, n)};
    }
    [[nodiscard]] KreState kre_state(const Vector& x) const {
        return {x.segment(Z, q), Eigen::Map<const Matrix>(x.data() + Psi, q, q)};
    }
    [[nodiscard]] GeneratorState generator(const Vector& x, Eigen::Index i) const {
        const Eigen::Index o = gen + 5 * i;
        return {x[o], {x[o + 1], x[o + 2]}, {x[o + 3], x[o + 4]}};
    }
    static void put_generator(Vector& x, Eigen::Index o, const GeneratorState& g) {
        x[o] = g.z;
        x[o + 1] = g.xi[0];
        x[o + 2] = g.xi[1];
        x[o + 3] = g.Phi[0];
        x[o + 4] = g.Phi[1];
    }
};

inline MixedLre mix_with_fault(const KreState& kre, const FaultInjection& fault) {
    MixedLre m = mix_unchecked(kre);
    if (fault.delta_offset != 0.0 || fault.disable_clamp) {
        m.raw_delta += fault.delta_offset;
        m.delta = fault.disable_clamp ? m.raw_delta : std::max<Real>(m.raw_delta, 0.0);
    }
    return m;
}

inline void update_estimator_summary(EstimatorSummary& s, Real err, Real est_abs, std::size_t step,
                                     Real tol_metric, Real tol) {
    s.final_error = err;
    s.min_error = std::min(s.min_error, err);
    s.max_abs_estimate = std::max(s.max_abs_estimate, est_abs);
    if (!s.first_below_tol && tol_metric < tol) s.first_below_tol = step;
}

inline void push_scalar_columns(std::vector<std::string>& cols, const std::string& prefix, Eigen::Index q) {
    for (Eigen::Index i = 0; i < q; ++i) cols.push_back(prefix + std::to_string(i + 1));
}

}  // namespace detail

/// CSV text of a run: `#` lines carrying the JSON config, a header row,
/// then one row per recorded step with 17 significant digits.
inline std::string render_csv(const ScenarioConfig& cfg, const RunRecord& rec) {
    std::string out;
    out.reserve(rec.rows.size() * rec.columns.size() * 24 + 512);
    out += "# ielre scenario " + cfg.name + "\n";
    out += "# config " + to_json(cfg).dump() + "\n";
    for (std::size_t c = 0; c < rec.columns.size(); ++c) {
        if (c) out += ',';
        out += rec.columns[c];
    }
    out += '\n';
    char buf[32];
    for (const auto& row : rec.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::snprintf(buf, sizeof buf, "%.17Lg", row[c]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write to " + path + " failed");
}

/// Plant -> regressor -> KRE -> mixing -> one generator per channel ->
/// selected estimators, integrated jointly with RK4 at step h. Invariants
/// and identity residuals are audited after every step.
inline RunRecord run_ct_scenario(const ScenarioConfig& cfg) {
    if (cfg.mode != Mode::CT) throw KindMismatch("run_ct_scenario: scenario is not CT");
    validate(cfg.plant);
    validate(cfg.kre);
    require_mode(cfg.kre.mode, Mode::CT, "run_ct_scenario");
    require_mode(cfg.generator.mode, Mode::CT, "run_ct_scenario");
    validate(cfg.generator);
    if (!is_ct_kind(cfg.input)) throw KindMismatch("run_ct_scenario: input is a DT signal");
    if (!(cfg.h > 0.0) || !(cfg.t_end > 0.0)) throw DomainError("run_ct_scenario: h and t_end must be positive");
    if (cfg.noise.amplitude < 0.0) throw DomainError("run_ct_scenario: negative noise amplitude");

    const detail::CtLayout L(cfg.plant.order(), cfg.estimators);
    const Eigen::Index q = L.q;
    const Vector theta = true_theta(cfg.plant);
    const Real theta_norm = theta.norm();
    const auto& sel = cfg.estimators;
    auto check_gain = [&](bool on, const Vector& g, const char* name) {
        if (on && g.size() != q) throw DomainError(std::string("run_ct_scenario: ") + name + " gain must have q entries");
    };
    check_gain(sel.grad, sel.grad_gain, "grad");
    check_gain(sel.drem, sel.drem_gain, "drem");
    check_gain(sel.newlre, sel.newlre_gain, "newlre");

    const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.h));
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    const Real slack = invariant_slack(cfg);

    RunRecord rec;
    auto& cols = rec.columns;
    cols.push_back("t");
    if (sel.grad) detail::push_scalar_columns(cols, "theta_hat_grad_", q);
    if (sel.drem) detail::push_scalar_columns(cols, "theta_hat_drem_", q);
    if (sel.newlre) detail::push_scalar_columns(cols, "theta_hat_newlre_", q);
    if (sel.grad) cols.push_back("err_grad");
    if (sel.drem) cols.push_back("err_drem");
    if (sel.newlre) cols.push_back("err_newlre");
    detail::push_scalar_columns(cols, "phi1_", q);
    detail::push_scalar_columns(cols, "phi2_", q);
    detail::push_scalar_columns(cols, "vtilde_", q);
    cols.push_back("delta");
    detail::push_scalar_columns(cols, "y2_", q);
    detail::push_scalar_columns(cols, "z_", q);
    rec.rows.reserve(steps / stride + 2);

    RunSummary& sum = rec.summary;
    sum.slack = slack;
    sum.invariants.resize(static_cast<std::size_t>(q));
    if (sel.grad) sum.estimators["grad"];
    if (sel.drem) sum.estimators["drem"];
    if (sel.newlre) sum.estimators["newlre"];

    Vector x = Vector::Zero(L.size);
    for (Eigen::Index i = 0; i < q; ++i) detail::CtLayout::put_generator(x, L.gen + 5 * i, GeneratorState::initial());
    if (sel.grad) x.segment(L.grad, q).setZero();

    // Noise is held constant over each step so every RK stage sees the same value.
    Real eta = 0.0;
    auto rhs = [&](Real t, const Vector& s) -> Vector {
        Vector d(L.size);
        const PlantState ps = L.plant_state(s);
        const Real u = eval_ct_signal(cfg.input, t);
        const PlantState dps = plant_rhs(ps, cfg.plant, u, eta);
        d.segment(L.plant, L.n) = dps.x_plant;
        d.segment(L.fu, L.n) = dps.x_fu;
        d.segment(L.fy, L.n) = dps.x_fy;

        const RegressionSample sample = read_sample(ps, cfg.plant, t, eta);
        const KreState kre = L.kre_state(s);
        const KreState dkre = kre_rhs_ct(kre, sample, cfg.kre);
        d.segment(L.Z, q) = dkre.Z;
        Eigen::Map<Matrix>(d.data() + L.Psi, q, q) = dkre.Psi;

        const MixedLre mixed = detail::mix_with_fault(kre, cfg.fault);
        for (Eigen::Index i = 0; i < q; ++i) {
            const ScalarLre lre = mixed.channel(i);
            const GeneratorState g = L.generator(s, i);
            detail::CtLayout::put_generator(d, L.gen + 5 * i, generator_rhs_ct(g, lre, cfg.generator));
            if (sel.newlre) {
                const EstimatorState est{s.segment(L.newlre, q), sel.newlre_gain};
                d[L.newlre + i] = grad_newlre_rhs_ct(est, read_new_lre(g, lre), i);
            }
        }
        if (sel.grad) d.segment(L.grad, q) = grad_vector_rhs_ct({s.segment(L.grad, q), sel.grad_gain}, sample);
        if (sel.drem) {
            const EstimatorState est{s.segment(L.drem, q), sel.drem_gain};
            for (Eigen::Index i = 0; i < q; ++i) d[L.drem + i] = grad_drem_rhs_ct(est, mixed, i);
        }
        return d;
    };

    std::vector<GeneratorState> prev_gen(static_cast<std::size_t>(q));
    const std::size_t half_step = steps / 2;

    auto audit = [&](std::size_t k, const Vector& s) {
        const Real t = static_cast<Real>(k) * cfg.h;
        const PlantState ps = L.plant_state(s);
        const RegressionSample sample = read_sample(ps, cfg.plant, t, eta);
        sum.max_lre_residual = std::max(sum.max_lre_residual, std::abs(sample.Y - sample.Omega.dot(theta)));
        const MixedLre mixed = detail::mix_with_fault(L.kre_state(s), cfg.fault);
        sum.min_raw_delta = std::min(sum.min_raw_delta, mixed.raw_delta);
        sum.max_delta = std::max(sum.max_delta, mixed.delta);
        sum.max_abs_state = std::max(sum.max_abs_state, s.lpNorm<Eigen::Infinity>());
        if (sum.max_abs_state > cfg.state_cap) sum.state_bounded = false;

        std::vector<GeneratorState> gens(static_cast<std::size_t>(q));
        std::vector<NewLre> news(static_cast<std::size_t>(q));
        for (Eigen::Index i = 0; i < q; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            gens[ui] = L.generator(s, i);
            news[ui] = read_new_lre(gens[ui], mixed.channel(i));
            const Real scale = 1.0 + std::abs(theta[i]);
            sum.max_mix_residual =
                std::max(sum.max_mix_residual, std::abs(mixed.caly[i] - mixed.delta * theta[i]) / scale);
            sum.max_newlre_residual =
                std::max(sum.max_newlre_residual, std::abs(news[ui].Y2 - news[ui].Phi2 * theta[i]) / scale);
            sum.invariants[ui].observe(k ? &prev_gen[ui] : nullptr, gens[ui], cfg.generator.beta, slack);
        }
        prev_gen = gens;

        auto track = [&](const char* name, Eigen::Index off) -> Real {
            if (off < 0) return 0.0;
            const Vector est = s.segment(off, q);
            const Real err = (est - theta).norm();
            auto& es = sum.estimators[name];
            detail::update_estimator_summary(es, err, est.lpNorm<Eigen::Infinity>(), k, err / theta_norm,
                                             cfg.convergence_tol);
            es.final_rel_error = err / theta_norm;
            if (k == half_step) es.half_error = err;
            return err;
        };
        const Real e_grad = track("grad", L.grad);
        const Real e_drem = track("drem", L.drem);
        const Real e_new = track("newlre", L.newlre);

        if (k % stride != 0 && k != steps) return;
        std::vector<Real> row;
        row.reserve(cols.size());
        row.push_back(t);
        for (Eigen::Index off : {L.grad, L.drem, L.newlre})
            if (off >= 0)
                for (Eigen::Index i = 0; i < q; ++i) row.push_back(s[off + i]);
        if (sel.grad) row.push_back(e_grad);
        if (sel.drem) row.push_back(e_drem);
        if (sel.newlre) row.push_back(e_new);
        for (const auto& g : gens) row.push_back(g.Phi[0]);
        for (const auto& g : gens) row.push_back(g.Phi[1]);
        for (const auto& g : gens) row.push_back(tilde_v(g.Phi, cfg.generator.beta));
        row.push_back(mixed.delta);
        for (const auto& nl : news) row.push_back(nl.Y2);
        for (const auto& g : gens) row.push_back(g.z);
        rec.rows.push_back(std::move(row));
        if (cfg.keep_regressor) rec.regressor.push_back(sample.Omega);
    };

    eta = make_noise(cfg.noise, 0);
    audit(0, x);
    for (std::size_t k = 0; k < steps; ++k) {
        eta = make_noise(cfg.noise, k);
        const Real t = static_cast<Real>(k) * cfg.h;
        try {
            x = integrate_rk4(rhs, x, t, cfg.h, k);
        } catch (const SimulationDiverged& e) {
            sum.diverged = true;
            sum.diverged_step = k;
            sum.divergence_message = e.what();
            if (!cfg.expect_divergence) throw;
            break;
        }
        sum.steps = k + 1;
        eta = make_noise(cfg.noise, k + 1);
        audit(k + 1, x);
    }
    for (Eigen::Index i = 0; i < q; ++i) sum.final_generators.push_back(L.generator(x, i));

    if (!cfg.out_path.empty()) write_text_file(cfg.out_path, render_csv(cfg, rec));
    return rec;
}

/// DT scalar experiment: delta(k) comes straight from the input signal and
/// caly(k) = delta(k) theta (+ noise). Drives the generator recursion and the
/// two DT gradient estimators side by side.
inline RunRecord run_dt_scenario(const ScenarioConfig& cfg) {
    if (cfg.mode != Mode::DT) throw KindMismatch("run_dt_scenario: scenario is not DT");
    require_mode(cfg.generator.mode, Mode::DT, "run_dt_scenario");
    validate(cfg.generator);
    if (!is_dt_kind(cfg.input)) throw KindMismatch("run_dt_scenario: input is a CT signal");
    if (cfg.k_end < 0) throw DomainError("run_dt_scenario: k_end must be non-negative");
    if (!(cfg.estimators.gamma > 0.0)) throw DomainError("run_dt_scenario: gamma must be positive");

    const Real theta = cfg.theta;
    const Real slack = invariant_slack(cfg);
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    const auto k_end = static_cast<std::size_t>(cfg.k_end);

    RunRecord rec;
    rec.columns = {"k", "theta_hat_ori_1", "theta_hat_new_1", "err_ori", "err_new", "phi1_1",
                   "phi2_1", "vtilde_1", "delta", "y2_1", "z_1"};
    rec.rows.reserve(k_end / stride + 2);
    RunSummary& sum = rec.summary;
    sum.slack = slack;
    sum.invariants.resize(1);
    auto& s_ori = sum.estimators["ori"];
    auto& s_new = sum.estimators["new"];

    GeneratorState gen = GeneratorState::initial();
    GeneratorState prev = gen;
    EstimatorState ori = EstimatorState::zero(1, cfg.estimators.gamma);
    EstimatorState nu = EstimatorState::zero(1, cfg.estimators.gamma);

    for (std::size_t k = 0;; ++k) {
        const Real delta = eval_dt_signal(cfg.input, static_cast<long long>(k), cfg.T());
        const ScalarLre lre{delta * theta + make_noise(cfg.noise, k), delta};
        const NewLre nl = read_new_lre(gen, lre);

        sum.min_raw_delta = std::min(sum.min_raw_delta, delta);
        sum.max_delta = std::max(sum.max_delta, delta);
        sum.max_abs_state = std::max({sum.max_abs_state, std::abs(gen.z), std::abs(gen.xi[0]), std::abs(gen.xi[1]),
                                      std::abs(gen.Phi[0]), std::abs(gen.Phi[1]), std::abs(ori.theta_hat[0]),
                                      std::abs(nu.theta_hat[0])});
        if (sum.max_abs_state > cfg.state_cap) sum.state_bounded = false;
        sum.max_newlre_residual =
            std::max(sum.max_newlre_residual, std::abs(nl.Y2 - nl.Phi2 * theta) / (1.0 + std::abs(theta)));
        sum.invariants[0].observe(k ? &prev : nullptr, gen, cfg.generator.beta, slack);
        prev = gen;

        const Real e_ori = std::abs(ori.theta_hat[0] - theta);
        const Real e_new = std::abs(nu.theta_hat[0] - theta);
        detail::update_estimator_summary(s_ori, e_ori, std::abs(ori.theta_hat[0]), k, e_ori, cfg.convergence_tol);
        detail::update_estimator_summary(s_new, e_new, std::abs(nu.theta_hat[0]), k, e_new, cfg.convergence_tol);
        const Real scale = std::abs(theta) > 0.0 ? std::abs(theta) : 1.0;
        s_ori.final_rel_error = e_ori / scale;
        s_new.final_rel_error = e_new / scale;
        if (k == k_end / 2) {
            s_ori.half_error = e_ori;
            s_new.half_error = e_new;
        }

        if (k % stride == 0 || k == k_end)
            rec.rows.push_back({static_cast<Real>(k), ori.theta_hat[0], nu.theta_hat[0], e_ori, e_new, gen.Phi[0],
                                gen.Phi[1], tilde_v(gen.Phi, cfg.generator.beta), delta, nl.Y2, gen.z});
        sum.steps = k;
        if (k == k_end) break;

        ori = grad_ori_step_dt(ori, lre);
        nu = grad_new_step_dt(nu, nl);
        gen = generator_step_dt(gen, lre, cfg.generator);
        const bool finite = std::isfinite(ori.theta_hat[0]) && std::isfinite(nu.theta_hat[0]) && std::isfinite(gen.z) &&
                            std::isfinite(gen.xi[0]) && std::isfinite(gen.xi[1]) && std::isfinite(gen.Phi[0]) &&
                            std::isfinite(gen.Phi[1]);
        if (!finite) {
            sum.diverged = true;
            sum.diverged_step = k + 1;
            sum.divergence_message = "run_dt_scenario: non-finite state at step " + std::to_string(k + 1);
            if (!cfg.expect_divergence) throw SimulationDiverged("run_dt_scenario: non-finite state", k + 1);
            break;
        }
    }
    sum.final_generators.push_back(gen);

    if (!cfg.out_path.empty()) write_text_file(cfg.out_path, render_csv(cfg, rec));
    return rec;
}

inline RunRecord run_scenario(const ScenarioConfig& cfg) {
    return cfg.mode == Mode::CT ? run_ct_scenario(cfg) : run_dt_scenario(cfg);
}

}  // namespace ielre
