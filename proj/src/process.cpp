#include "sfd/process.hpp"

#include <cmath>
#include <numbers>

namespace sfd {

namespace {

void check_step(const SubSequence& phi, int t, int lowest = 1) {
    if (t < lowest || t > phi.t_prime())
        throw StepOutOfRange("step " + std::to_string(t) + " outside [" + std::to_string(lowest) +
                             ", " + std::to_string(phi.t_prime()) + "]");
}

}  // namespace

GaussianParams forward_step_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                                   const Vec& x_prev) {
    check_step(phi, t);
    const double a_t = schedule.at(phi.phi[t]);
    const double a_prev = schedule.at(phi.phi[t - 1]);
    const double ratio = a_t / a_prev;
    GaussianParams out;
    out.mean.resize(x_prev.size());
    const double scale = std::sqrt(ratio);
    for (std::size_t i = 0; i < x_prev.size(); ++i) out.mean[i] = scale * x_prev[i];
    out.variance = 1.0 - ratio;
    return out;
}

GaussianParams marginal_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                               const Vec& x0) {
    check_step(phi, t, 0);
    const double a_t = schedule.at(phi.phi[t]);
    GaussianParams out;
    out.mean.resize(x0.size());
    const double scale = std::sqrt(a_t);
    for (std::size_t i = 0; i < x0.size(); ++i) out.mean[i] = scale * x0[i];
    out.variance = 1.0 - a_t;
    return out;
}

GaussianParams posterior_params(const AlphaSchedule& schedule, const SubSequence& phi, int t,
                                const Vec& x_t, const Vec& x0) {
    check_step(phi, t);
    if (x_t.size() != x0.size()) throw DimensionMismatch("posterior_params: x_t / x0 dimension mismatch");
    const double a_t = schedule.at(phi.phi[t]);
    const double a_prev = schedule.at(phi.phi[t - 1]);
    if (a_t >= 1.0) throw StepOutOfRange("degenerate step: a_t = 1 at t=" + std::to_string(t));

    const double coef_xt = (1.0 - a_prev) * std::sqrt(a_t) / ((1.0 - a_t) * std::sqrt(a_prev));
    const double coef_x0 = (a_prev - a_t) / ((1.0 - a_t) * std::sqrt(a_prev));
    GaussianParams out;
    out.mean.resize(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        out.mean[i] = coef_xt * x_t[i] + coef_x0 * x0[i];
    out.variance = (1.0 - a_prev) * (a_prev - a_t) / ((1.0 - a_t) * a_prev);
    return out;
}

Vec predict_x0(const NoisePredictor& net, const AlphaSchedule& schedule, const SubSequence& phi,
               int t, const Vec& x_t) {
    check_step(phi, t);
    const double a_t = schedule.at(phi.phi[t]);
    const double t_norm = static_cast<double>(t) / phi.t_prime();
    Vec eps = net.predict(x_t, t_norm);
    const double noise_scale = std::sqrt(1.0 - a_t);
    const double inv_signal = 1.0 / std::sqrt(a_t);
    Vec out(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        out[i] = (x_t[i] - noise_scale * eps[i]) * inv_signal;
    return out;
}

GaussianParams reverse_params(const NoisePredictor& net, const AlphaSchedule& schedule,
                              const SubSequence& phi, int t, const Vec& x_t) {
    return posterior_params(schedule, phi, t, x_t, predict_x0(net, schedule, phi, t, x_t));
}

Vec ddim_step(const NoisePredictor& net, const AlphaSchedule& schedule, const SubSequence& phi,
              int t, const Vec& x_t) {
    check_step(phi, t);
    const double a_t = schedule.at(phi.phi[t]);
    const double a_prev = schedule.at(phi.phi[t - 1]);
    const double t_norm = static_cast<double>(t) / phi.t_prime();
    Vec eps = net.predict(x_t, t_norm);
    const double noise_scale = std::sqrt(1.0 - a_t);
    const double inv_signal = 1.0 / std::sqrt(a_t);
    const double signal_prev = std::sqrt(a_prev);
    const double noise_prev = std::sqrt(1.0 - a_prev);
    Vec out(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i) {
        double x0_hat = (x_t[i] - noise_scale * eps[i]) * inv_signal;
        out[i] = signal_prev * x0_hat + noise_prev * eps[i];
    }
    return out;
}

double gaussian_log_density(double x, double mean, double variance) {
    const double r = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

}  // namespace sfd
