#pragma once

#include <stdexcept>
#include <string>

#include "ielre/kre_drem.hpp"
#include "ielre/lre_generator.hpp"
#include "ielre/lti_plant.hpp"
#include "ielre/types.hpp"

namespace ielre {

/// Parameter estimate with a diagonal gain: Gamma for the vector gradient,
/// one gamma_i per channel for the scalar estimators. Gains must be > 0.
struct EstimatorState {
    Vector theta_hat;
    Vector gain;

    static EstimatorState zero(Eigen::Index q, Real gain) {
        return {Vector::Zero(q), Vector::Constant(q, gain)};
    }
    static EstimatorState zero(const Vector& gains) { return {Vector::Zero(gains.size()), gains}; }
};

namespace detail {

inline void check_gains(const EstimatorState& est) {
    if (est.gain.size() != est.theta_hat.size()) throw std::invalid_argument("estimator: gain/estimate size mismatch");
    for (Eigen::Index i = 0; i < est.gain.size(); ++i)
        if (!(est.gain[i] > 0.0)) throw DomainError("estimator: gains must be positive");
}

inline void check_index(const EstimatorState& est, Eigen::Index i) {
    if (i < 0 || i >= est.theta_hat.size())
        throw std::out_of_range("estimator: channel " + std::to_string(i) + " out of range");
}

inline void check_scalar(const EstimatorState& est) {
    if (est.theta_hat.size() != 1) throw std::invalid_argument("estimator: DT update expects a scalar channel");
    check_gains(est);
}

}  // namespace detail

/// theta_hat' = Gamma Omega (Y - Omega^T theta_hat).
inline Vector grad_vector_rhs_ct(const EstimatorState& est, const RegressionSample& sample) {
    detail::check_gains(est);
    if (sample.Omega.size() != est.theta_hat.size())
        throw std::invalid_argument("grad_vector_rhs_ct: regressor has dimension " +
                                    std::to_string(sample.Omega.size()) + ", estimate has " +
                                    std::to_string(est.theta_hat.size()));
    const Real err = sample.Y - sample.Omega.dot(est.theta_hat);
    return est.gain.cwiseProduct(sample.Omega) * err;
}

/// theta_hat_i' = gamma_i delta (caly_i - delta theta_hat_i).
inline Real grad_drem_rhs_ct(const EstimatorState& est, const MixedLre& mixed, Eigen::Index i) {
    detail::check_index(est, i);
    const ScalarLre lre = mixed.channel(i);
    return est.gain[i] * lre.delta * (lre.caly - lre.delta * est.theta_hat[i]);
}

/// theta_hat_i' = gamma_i Phi2 (Y2 - Phi2 theta_hat_i), with the new LRE of channel i.
inline Real grad_newlre_rhs_ct(const EstimatorState& est, const NewLre& lre, Eigen::Index i) {
    detail::check_index(est, i);
    return est.gain[i] * lre.Phi2 * (lre.Y2 - lre.Phi2 * est.theta_hat[i]);
}

inline EstimatorState grad_ori_step_dt(const EstimatorState& est, const ScalarLre& lre) {
    detail::check_scalar(est);
    EstimatorState out = est;
    out.theta_hat[0] += est.gain[0] * lre.delta * (lre.caly - lre.delta * est.theta_hat[0]);
    return out;
}

inline EstimatorState grad_new_step_dt(const EstimatorState& est, const NewLre& lre) {
    detail::check_scalar(est);
    EstimatorState out = est;
    out.theta_hat[0] += est.gain[0] * lre.Phi2 * (lre.Y2 - lre.Phi2 * est.theta_hat[0]);
    return out;
}

}  // namespace ielre
