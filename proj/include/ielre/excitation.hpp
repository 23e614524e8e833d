#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ielre/types.hpp"

namespace ielre {

enum class Verdict { PE, IEOnly, NotExcited };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::PE: return "PE";
        case Verdict::IEOnly: return "IEOnly";
        case Verdict::NotExcited: return "NotExcited";
    }
    return "?";
}

inline constexpr Real kDefaultPeThreshold = 1e-6;
inline constexpr Real kDefaultIeThreshold = 1e-6;

/// Finite-horizon proxy for interval and persistent excitation.
///
/// ie_constant is the smallest eigenvalue of the accumulated energy
/// sum_{j<=k} u(j)u(j)^T (or its integral) at the end of the data, which is
/// where it is largest. ie_horizon is the first time/index at which that
/// eigenvalue exceeds the IE threshold, or the last sample when it never does.
/// pe_floor is the minimum over all complete windows of the smallest
/// eigenvalue of the windowed energy; it is 0 when no complete window fits.
/// A PE verdict means every complete window in the data exceeds the
/// threshold, which is evidence, not proof, of persistency.
struct ExcitationReport {
    Real ie_constant = 0.0;
    Real ie_horizon = 0.0;
    Real pe_floor = 0.0;
    Real window = 0.0;
    Verdict verdict = Verdict::NotExcited;
};

namespace detail {

inline Real min_eigenvalue(const Matrix& s) {
    if (s.rows() == 1) return s(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

inline Verdict classify(Real ie_constant, Real pe_floor, Real pe_threshold, Real ie_threshold) {
    if (!(ie_constant > ie_threshold)) return Verdict::NotExcited;
    return pe_floor > pe_threshold ? Verdict::PE : Verdict::IEOnly;
}

inline std::size_t checked_dim(std::span<const Vector> series) {
    const auto m = static_cast<std::size_t>(series.front().size());
    if (m == 0) throw DomainError("excitation report: zero-dimensional samples");
    for (const auto& u : series)
        if (static_cast<std::size_t>(u.size()) != m)
            throw DomainError("excitation report: samples have inconsistent dimension");
    return m;
}

// Sliding sums of `terms[i]` over `width` consecutive terms. The running sum
// is rebuilt from scratch every `width` shifts so round-off cannot build up
// over long series.
inline Real sliding_min_eigenvalue(const std::vector<Matrix>& terms, std::size_t width) {
    if (terms.size() < width) return 0.0;
    const auto m = terms.front().rows();
    Real floor = std::numeric_limits<Real>::infinity();
    Matrix acc = Matrix::Zero(m, m);
    for (std::size_t start = 0; start + width <= terms.size(); ++start) {
        if (start % width == 0) {
            acc.setZero();
            for (std::size_t i = start; i < start + width; ++i) acc += terms[i];
        } else {
            acc += terms[start + width - 1];
            acc -= terms[start - 1];
        }
        floor = std::min(floor, min_eigenvalue(acc));
    }
    return std::max<Real>(floor, 0.0);
}

}  // namespace detail

/// DT excitation report. `window` counts samples per window.
inline ExcitationReport excitation_report_dt(std::span<const Vector> series, std::size_t window,
                                             Real pe_threshold = kDefaultPeThreshold,
                                             Real ie_threshold = kDefaultIeThreshold) {
    if (series.empty()) throw DomainError("excitation_report_dt: empty series");
    if (window < 1) throw DomainError("excitation_report_dt: window must be >= 1");
    const auto m = static_cast<Eigen::Index>(detail::checked_dim(series));

    std::vector<Matrix> energy;
    energy.reserve(series.size());
    for (const auto& u : series) energy.emplace_back(u * u.transpose());

    ExcitationReport rep;
    rep.window = static_cast<Real>(window);
    Matrix running = Matrix::Zero(m, m);
    bool crossed = false;
    for (std::size_t k = 0; k < energy.size(); ++k) {
        running += energy[k];
        const Real lam = detail::min_eigenvalue(running);
        rep.ie_constant = std::max(rep.ie_constant, lam);
        if (!crossed && lam > ie_threshold) {
            crossed = true;
            rep.ie_horizon = static_cast<Real>(k);
        }
    }
    if (!crossed) rep.ie_horizon = static_cast<Real>(energy.size() - 1);
    rep.pe_floor = detail::sliding_min_eigenvalue(energy, window);
    rep.verdict = detail::classify(rep.ie_constant, rep.pe_floor, pe_threshold, ie_threshold);
    return rep;
}

inline ExcitationReport excitation_report_dt(std::span<const Real> series, std::size_t window,
                                             Real pe_threshold = kDefaultPeThreshold,
                                             Real ie_threshold = kDefaultIeThreshold) {
    std::vector<Vector> v;
    v.reserve(series.size());
    for (Real x : series) v.emplace_back(Vector::Constant(1, x));
    return excitation_report_dt(std::span<const Vector>(v), window, pe_threshold, ie_threshold);
}

/// CT excitation report on samples u(j*h). Integrals use the trapezoid rule;
/// `window` is a duration and is rounded to a whole number of steps.
inline ExcitationReport excitation_report_ct(std::span<const Vector> series, Real h, Real window,
                                             Real pe_threshold = kDefaultPeThreshold,
                                             Real ie_threshold = kDefaultIeThreshold) {
    if (series.size() < 2) throw DomainError("excitation_report_ct: need at least 2 samples");
    if (!(h > 0.0)) throw DomainError("excitation_report_ct: step must be positive");
    if (!(window >= h * (1.0 - 1e-9))) throw DomainError("excitation_report_ct: window shorter than one step");
    const auto m = static_cast<Eigen::Index>(detail::checked_dim(series));

    std::vector<Matrix> segments;
    segments.reserve(series.size() - 1);
    for (std::size_t j = 0; j + 1 < series.size(); ++j)
        segments.emplace_back(0.5 * h *
                              (series[j] * series[j].transpose() + series[j + 1] * series[j + 1].transpose()));

    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window / h)));

    ExcitationReport rep;
    rep.window = static_cast<Real>(steps) * h;
    Matrix running = Matrix::Zero(m, m);
    bool crossed = false;
    for (std::size_t j = 0; j < segments.size(); ++j) {
        running += segments[j];
        const Real lam = detail::min_eigenvalue(running);
        rep.ie_constant = std::max(rep.ie_constant, lam);
        if (!crossed && lam > ie_threshold) {
            crossed = true;
            rep.ie_horizon = static_cast<Real>(j + 1) * h;
        }
    }
    if (!crossed) rep.ie_horizon = static_cast<Real>(segments.size()) * h;
    rep.pe_floor = detail::sliding_min_eigenvalue(segments, steps);
    rep.verdict = detail::classify(rep.ie_constant, rep.pe_floor, pe_threshold, ie_threshold);
    return rep;
}

inline ExcitationReport excitation_report_ct(std::span<const Real> series, Real h, Real window,
                                             Real pe_threshold = kDefaultPeThreshold,
                                             Real ie_threshold = kDefaultIeThreshold) {
    std::vector<Vector> v;
    v.reserve(series.size());
    for (Real x : series) v.emplace_back(Vector::Constant(1, x));
    return excitation_report_ct(std::span<const Vector>(v), h, window, pe_threshold, ie_threshold);
}

}  // namespace ielre
