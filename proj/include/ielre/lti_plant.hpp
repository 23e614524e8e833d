#pragma once

#include <string>
#include <vector>

#include "ielre/types.hpp"

namespace ielre {

/// SISO plant B(p)/A(p) of order n with a monic Hurwitz filter polynomial
/// lambda(p) = p^n + lambda[n-1] p^{n-1} + ... + lambda[0].
///
/// a[i], b[i], lambda[i] are the coefficients of p^i. The identification
/// regressor is Omega = [F(p) y; F(p) u] with F(p) = [1 p ... p^{n-1}]^T / lambda(p).
struct PlantConfig {
    Vector a;
    Vector b;
    Vector lambda;

    [[nodiscard]] Eigen::Index order() const { return a.size(); }
    [[nodiscard]] Eigen::Index regressor_dim() const { return 2 * a.size(); }

    static PlantConfig second_order(Real a0, Real a1, Real b0, Real b1, Real l0, Real l1) {
        PlantConfig c;
        c.a = Vector{{a0, a1}};
        c.b = Vector{{b0, b1}};
        c.lambda = Vector{{l0, l1}};
        return c;
    }
};

/// Routh test on the monic polynomial p^n + c[n-1] p^{n-1} + ... + c[0].
inline bool is_hurwitz_monic(const Vector& c) {
    const auto n = c.size();
    if (n == 0) return true;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(c[i] > 0.0)) return false;
    if (n <= 2) return true;

    // Coefficients from the highest power down.
    std::vector<Real> desc(static_cast<std::size_t>(n + 1));
    desc[0] = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) desc[static_cast<std::size_t>(i + 1)] = c[n - 1 - i];

    std::vector<Real> r0, r1;
    for (std::size_t i = 0; i < desc.size(); i += 2) r0.push_back(desc[i]);
    for (std::size_t i = 1; i < desc.size(); i += 2) r1.push_back(desc[i]);
    for (Eigen::Index row = 0; row < n; ++row) {
        if (!(r1.front() > 0.0)) return false;
        std::vector<Real> next;
        for (std::size_t j = 0; j + 1 < r0.size(); ++j) {
            const Real lower = j + 1 < r1.size() ? r1[j + 1] : 0.0;
            next.push_back((r1.front() * r0[j + 1] - r0.front() * lower) / r1.front());
        }
        if (next.empty()) break;
        r0 = std::move(r1);
        r1 = std::move(next);
    }
    return true;
}

inline void validate(const PlantConfig& cfg) {
    const auto n = cfg.order();
    if (n < 1) throw DomainError("PlantConfig: order must be >= 1");
    if (cfg.b.size() != n || cfg.lambda.size() != n)
        throw DomainError("PlantConfig: a, b and lambda must all have length n");
    if (!is_hurwitz_monic(cfg.lambda)) throw DomainError("PlantConfig: lambda(p) is not Hurwitz");
}

/// Plant in controllable canonical form, plus the two filter banks F(p)u and
/// F(p)y. All blocks start at zero.
struct PlantState {
    Vector x_plant;
    Vector x_fu;
    Vector x_fy;

    static PlantState zero(Eigen::Index n) {
        return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
    }
};

/// One observation of Y = Omega^T theta.
struct RegressionSample {
    Real t = 0.0;
    Real Y = 0.0;
    Vector Omega;
};

/// theta = [lambda - a; b].
inline Vector true_theta(const PlantConfig& cfg) {
    const auto n = cfg.order();
    Vector theta(2 * n);
    theta.head(n) = cfg.lambda - cfg.a;
    theta.tail(n) = cfg.b;
    return theta;
}

inline Real plant_output(const PlantState& s, const PlantConfig& cfg) { return cfg.b.dot(s.x_plant); }

namespace detail {

// x' = companion(c) x + e_n v
inline Vector canonical_rhs(const Vector& x, const Vector& c, Real v) {
    const auto n = x.size();
    Vector dx(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) dx[i] = x[i + 1];
    dx[n - 1] = v - c.dot(x);
    return dx;
}

}  // namespace detail

/// Time derivative of every block. `y_measurement_offset` is added to the
/// plant output before it enters the F(p)y filter; it carries output noise,
/// so the regressor is built from the same measured signal as Y.
inline PlantState plant_rhs(const PlantState& s, const PlantConfig& cfg, Real u_p,
                            Real y_measurement_offset = 0.0) {
    const Real y_meas = plant_output(s, cfg) + y_measurement_offset;
    return {detail::canonical_rhs(s.x_plant, cfg.a, u_p), detail::canonical_rhs(s.x_fu, cfg.lambda, u_p),
            detail::canonical_rhs(s.x_fy, cfg.lambda, y_meas)};
}

/// Y = y_p + noise, Omega = [x_fy; x_fu].
inline RegressionSample read_sample(const PlantState& s, const PlantConfig& cfg, Real t, Real noise) {
    const auto n = cfg.order();
    RegressionSample out;
    out.t = t;
    out.Y = plant_output(s, cfg) + noise;
    out.Omega.resize(2 * n);
    out.Omega.head(n) = s.x_fy;
    out.Omega.tail(n) = s.x_fu;
    return out;
}

}  // namespace ielre
