#pragma once

#include <array>
#include <cmath>
#include <string>

#include "ielre/lti_plant.hpp"
#include "ielre/types.hpp"

namespace ielre {

/// Largest matrix handled by the cofactor routines.
inline constexpr Eigen::Index kMaxCofactorDim = 6;

namespace detail {

using IndexSet = std::array<Eigen::Index, kMaxCofactorDim>;

// Determinant of the square submatrix of m picked by rows[0..k) x cols[0..k),
// expanded along its first row.
template <typename Derived>
Real minor_det(const Eigen::MatrixBase<Derived>& m, const IndexSet& rows, const IndexSet& cols, Eigen::Index k) {
    switch (k) {
        case 0: return 1.0;
        case 1: return m(rows[0], cols[0]);
        case 2:
            return m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
        case 3: {
            const auto r0 = rows[0], r1 = rows[1], r2 = rows[2];
            const auto c0 = cols[0], c1 = cols[1], c2 = cols[2];
            return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
                   m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
                   m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
        }
        default: break;
    }
    IndexSet sub_rows{};
    for (Eigen::Index i = 1; i < k; ++i) sub_rows[static_cast<std::size_t>(i - 1)] = rows[static_cast<std::size_t>(i)];
    Real acc = 0.0;
    Real sign = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        IndexSet sub_cols{};
        for (Eigen::Index c = 0, w = 0; c < k; ++c)
            if (c != j) sub_cols[static_cast<std::size_t>(w++)] = cols[static_cast<std::size_t>(c)];
        const Real a = m(rows[0], cols[static_cast<std::size_t>(j)]);
        if (a != 0.0) acc += sign * a * minor_det(m, sub_rows, sub_cols, k - 1);
        sign = -sign;
    }
    return acc;
}

inline IndexSet iota_set(Eigen::Index n) {
    IndexSet s{};
    for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

template <typename Derived>
Eigen::Index checked_square_dim(const Eigen::MatrixBase<Derived>& m, const char* who) {
    if (m.rows() != m.cols()) throw DomainError(std::string(who) + ": matrix must be square");
    if (m.rows() < 1) throw DomainError(std::string(who) + ": matrix must be at least 1x1");
    if (m.rows() > kMaxCofactorDim)
        throw DomainError(std::string(who) + ": cofactor expansion supports at most 6x6");
    return m.rows();
}

}  // namespace detail

/// Determinant by cofactor expansion (q <= 6). No pivoting, so the result is
/// a fixed arithmetic expression of the entries.
template <typename Derived>
Real determinant(const Eigen::MatrixBase<Derived>& m) {
    const auto n = detail::checked_square_dim(m, "determinant");
    const auto idx = detail::iota_set(n);
    return detail::minor_det(m, idx, idx, n);
}

/// Classical adjugate, the transpose of the cofactor matrix. adj of a 1x1
/// matrix is [1].
template <typename Derived>
Matrix adjugate(const Eigen::MatrixBase<Derived>& m) {
    const auto n = detail::checked_square_dim(m, "adjugate");
    Matrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        detail::IndexSet rows{};
        for (Eigen::Index r = 0, w = 0; r < n; ++r)
            if (r != i) rows[static_cast<std::size_t>(w++)] = r;
        for (Eigen::Index j = 0; j < n; ++j) {
            detail::IndexSet cols{};
            for (Eigen::Index c = 0, w = 0; c < n; ++c)
                if (c != j) cols[static_cast<std::size_t>(w++)] = c;
            const Real sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(j, i) = sign * detail::minor_det(m, rows, cols, n - 1);
        }
    }
    return adj;
}

/// Kreisselmeier extension H = g/(p + lambda_f) in CT, g/(q - alpha) in DT.
struct KreConfig {
    Real g = 100.0;
    Real lambda_f = 30.0;
    Real alpha = 0.5;
    Mode mode = Mode::CT;
};

inline void validate(const KreConfig& cfg) {
    if (!(cfg.g > 0.0)) throw DomainError("KreConfig: g must be positive");
    if (cfg.mode == Mode::CT && !(cfg.lambda_f > 0.0)) throw DomainError("KreConfig: lambda_f must be positive");
    if (cfg.mode == Mode::DT && !(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw DomainError("KreConfig: alpha must lie in (0,1)");
}

/// Z = H[Omega Y], Psi = H[Omega Omega^T], both started at zero.
struct KreState {
    Vector Z;
    Matrix Psi;

    static KreState zero(Eigen::Index q) { return {Vector::Zero(q), Matrix::Zero(q, q)}; }
};

/// One decoupled scalar regression caly = delta * theta_i.
struct ScalarLre {
    Real caly = 0.0;
    Real delta = 0.0;
};

/// Mixed extension: caly = adj(Psi) Z, delta = det(Psi).
///
/// `delta` is clamped at zero when round-off makes det(Psi) marginally
/// negative; `raw_delta` keeps the unclamped value.
struct MixedLre {
    Vector caly;
    Real delta = 0.0;
    Real raw_delta = 0.0;

    [[nodiscard]] ScalarLre channel(Eigen::Index i) const {
        if (i < 0 || i >= caly.size()) throw std::out_of_range("MixedLre: channel index out of range");
        return {caly[i], delta};
    }
};

/// Round-off allowance for a negative det(Psi).
inline constexpr Real kDeltaNegativeTolerance = 1e-12;

inline void require_mode(Mode actual, Mode wanted, const char* who) {
    if (actual != wanted)
        throw KindMismatch(std::string(who) + ": configured for " + to_string(actual) + ", expected " +
                           to_string(wanted));
}

inline KreState kre_rhs_ct(const KreState& s, const RegressionSample& sample, const KreConfig& cfg) {
    require_mode(cfg.mode, Mode::CT, "kre_rhs_ct");
    return {-cfg.lambda_f * s.Z + cfg.g * sample.Omega * sample.Y,
            -cfg.lambda_f * s.Psi + cfg.g * sample.Omega * sample.Omega.transpose()};
}

inline KreState kre_step_dt(const KreState& s, const RegressionSample& sample, const KreConfig& cfg) {
    require_mode(cfg.mode, Mode::DT, "kre_step_dt");
    return {cfg.alpha * s.Z + cfg.g * sample.Omega * sample.Y,
            cfg.alpha * s.Psi + cfg.g * sample.Omega * sample.Omega.transpose()};
}

/// Mixing without the sign check. Used inside integrator stages, where the
/// sign of det(Psi) is audited at step boundaries instead.
inline MixedLre mix_unchecked(const KreState& s) {
    MixedLre out;
    out.raw_delta = determinant(s.Psi);
    out.delta = out.raw_delta < 0.0 ? 0.0 : out.raw_delta;
    out.caly = adjugate(s.Psi) * s.Z;
    return out;
}

/// Throws InvariantViolation when det(Psi) < -1e-12: Psi is PSD by
/// construction, so that can only come from a bug upstream.
inline MixedLre mix(const KreState& s) {
    MixedLre out = mix_unchecked(s);
    if (out.raw_delta < -kDeltaNegativeTolerance)
        throw InvariantViolation("mix: det(Psi) = " + format_g(out.raw_delta, 6) + " is negative");
    return out;
}

}  // namespace ielre
