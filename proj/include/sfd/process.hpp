#pragma once

#include "sfd/linalg.hpp"
#include "sfd/net.hpp"
#include "sfd/schedule.hpp"

namespace sfd {

// Isotropic Gaussian: mean vector plus scalar variance.
struct GaussianParams {
    Vec mean;
    double variance = 0.0;
};

// All closed-form chain math below interprets t as a student step index in
// 1..T' against (schedule, phi); the teacher is the identity-phi special case.
// a_t = alpha[phi_t], a_prev = alpha[phi_{t-1}].

// q'(x'_t | x'_{t-1}): mean sqrt(a_t/a_prev) x_prev, variance 1 - a_t/a_prev.
GaussianParams forward_step_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                                   const Vec& x_prev);

// q'(x'_t | x'_0): mean sqrt(a_t) x0, variance 1 - a_t. Valid for t in 0..T'.
GaussianParams marginal_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                               const Vec& x0);

// Forward-process posterior q'(x'_{t-1} | x'_t, x'_0).
GaussianParams posterior_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                                const Vec& x_t, const Vec& x0);

// x0 estimate: (x_t - sqrt(1-a_t) eps(x_t, t)) / sqrt(a_t).
Vec predict_x0(const NoisePredictor& net, const AlphaSchedule& schedule, const SubSequence& phi,
               int t, const Vec& x_t);

// Reverse step p'(x'_{t-1} | x'_t): the posterior with x0 replaced by the
// predictor. Variance is the posterior variance regardless of the network.
GaussianParams reverse_params(const NoisePredictor& net, const AlphaSchedule& schedule,
                              const SubSequence& phi, int t, const Vec& x_t);

// Deterministic update x_{t-1} = sqrt(a_prev) predict_x0 + sqrt(1-a_prev) eps.
Vec ddim_step(const NoisePredictor& net, const AlphaSchedule& schedule, const SubSequence& phi,
              int t, const Vec& x_t);

// Log density of an isotropic Gaussian at a scalar coordinate; the grid
// oracles in tests work per axis in log space.
double gaussian_log_density(double x, double mean, double variance);

}  // namespace sfd
