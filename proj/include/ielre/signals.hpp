#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "ielre/types.hpp"

namespace ielre {

enum class SignalTag { Upa, Upb, DeltaA, DeltaB, DeltaC, DeltaD, Constant, Custom };

/// Input or excitation signal.
///
/// Upa/Upb are plant inputs defined for t >= 0. DeltaA..DeltaD are scalar
/// sequences defined on the sample index. Constant and Custom are accepted in
/// both domains; a Custom callable receives t (CT) or k (DT).
struct SignalKind {
    SignalTag tag = SignalTag::Constant;
    Real value = 0.0;
    std::function<Real(Real)> custom;

    static SignalKind upa() { return {SignalTag::Upa, 0.0, {}}; }
    static SignalKind upb() { return {SignalTag::Upb, 0.0, {}}; }
    static SignalKind delta_a() { return {SignalTag::DeltaA, 0.0, {}}; }
    static SignalKind delta_b() { return {SignalTag::DeltaB, 0.0, {}}; }
    static SignalKind delta_c() { return {SignalTag::DeltaC, 0.0, {}}; }
    static SignalKind delta_d() { return {SignalTag::DeltaD, 0.0, {}}; }
    static SignalKind constant(Real v) { return {SignalTag::Constant, v, {}}; }
    static SignalKind from(std::function<Real(Real)> f) {
        return {SignalTag::Custom, 0.0, std::move(f)};
    }
};

inline bool is_ct_kind(const SignalKind& s) {
    return s.tag == SignalTag::Upa || s.tag == SignalTag::Upb || s.tag == SignalTag::Constant ||
           s.tag == SignalTag::Custom;
}

inline bool is_dt_kind(const SignalKind& s) {
    return s.tag != SignalTag::Upa && s.tag != SignalTag::Upb;
}

inline std::string to_string(const SignalKind& s) {
    switch (s.tag) {
        case SignalTag::Upa: return "upa";
        case SignalTag::Upb: return "upb";
        case SignalTag::DeltaA: return "a";
        case SignalTag::DeltaB: return "b";
        case SignalTag::DeltaC: return "c";
        case SignalTag::DeltaD: return "d";
        case SignalTag::Constant: return "constant(" + std::to_string(s.value) + ")";
        case SignalTag::Custom: return "custom";
    }
    return "?";
}

/// Parses the CLI spellings "upa", "upb", "a".."d".
inline std::optional<SignalKind> parse_signal(std::string_view name) {
    if (name == "upa") return SignalKind::upa();
    if (name == "upb") return SignalKind::upb();
    if (name == "a") return SignalKind::delta_a();
    if (name == "b") return SignalKind::delta_b();
    if (name == "c") return SignalKind::delta_c();
    if (name == "d") return SignalKind::delta_d();
    return std::nullopt;
}

inline Real eval_ct_signal(const SignalKind& kind, Real t) {
    if (!is_ct_kind(kind)) throw KindMismatch("eval_ct_signal: " + to_string(kind) + " is a DT signal");
    if (t < 0.0) throw DomainError("eval_ct_signal: t must be non-negative");
    switch (kind.tag) {
        case SignalTag::Upa: return std::sin(2.0 * std::numbers::pi * t) + std::cos(3.0 * t);
        case SignalTag::Upb: return std::exp(-2.0 * t) + std::exp(-1.5 * t);
        case SignalTag::Constant: return kind.value;
        case SignalTag::Custom: return kind.custom(t);
        default: break;
    }
    throw KindMismatch("eval_ct_signal: unsupported kind");
}

/// Pulse end for DeltaB, in units of sample time k*T.
inline constexpr Real kPulseEnd = 0.2;

/// `T` is only consulted by DeltaB, whose pulse lasts while k*T <= 0.2.
inline Real eval_dt_signal(const SignalKind& kind, long long k, Real T) {
    if (!is_dt_kind(kind)) throw KindMismatch("eval_dt_signal: " + to_string(kind) + " is a CT signal");
    if (k < 0) throw DomainError("eval_dt_signal: k must be non-negative");
    if (!(T > 0.0)) throw DomainError("eval_dt_signal: T must be positive");
    const Real kd = static_cast<Real>(k);
    switch (kind.tag) {
        case SignalTag::DeltaA: return std::exp(-3.0 * kd);
        // 1e-12 absorbs the representation error of T (20 * 0.01 must count as 0.2).
        case SignalTag::DeltaB: return kd * T <= kPulseEnd + 1e-12 ? 1.0 : 0.0;
        case SignalTag::DeltaC: return 1.0 / (7.0 + kd);
        case SignalTag::DeltaD: return std::cos(std::numbers::pi * kd / 4.0);
        case SignalTag::Constant: return kind.value;
        case SignalTag::Custom: return kind.custom(kd);
        default: break;
    }
    throw KindMismatch("eval_dt_signal: unsupported kind");
}

}  // namespace ielre
