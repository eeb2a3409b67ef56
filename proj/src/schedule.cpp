#include "sfd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfd/rng.hpp"

namespace sfd {

namespace {

constexpr double kAlphaMin = 1e-5;
constexpr double kAlphaGap = 1e-5;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double AlphaSchedule::at(int t) const {
    if (t < 0 || t > T) throw StepOutOfRange("alpha index " + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
    if (t == 0) return 1.0;
    return alpha[t - 1];
}

void AlphaSchedule::validate() const {
    if (T < 1 || static_cast<int>(alpha.size()) != T)
        throw InvalidParameter("schedule length mismatch: T=" + std::to_string(T) + ", got " +
                               std::to_string(alpha.size()) + " values");
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        double a = alpha[t - 1];
        if (!(a > 0.0 && a <= 1.0))
            throw InvalidParameter("alpha[" + std::to_string(t) + "] = " + std::to_string(a) +
                                   " outside (0, 1]");
        if (!(a < prev))
            throw InvalidParameter("alpha not strictly decreasing at t=" + std::to_string(t));
        prev = a;
    }
}

void SubSequence::validate(int T) const {
    if (phi.size() < 2) throw InvalidParameter("sub-sequence needs at least two indices");
    if (phi.front() != 0) throw InvalidParameter("phi_0 must be 0, got " + std::to_string(phi.front()));
    if (phi.back() != T)
        throw InvalidParameter("phi_last must equal T=" + std::to_string(T) + ", got " +
                               std::to_string(phi.back()));
    for (std::size_t i = 1; i < phi.size(); ++i) {
        if (!(phi[i - 1] < phi[i]))
            throw InvalidParameter("phi not strictly increasing at position " + std::to_string(i));
    }
}

AlphaSchedule make_sigmoid_schedule(int T, double start, double end, double tau) {
    if (T < 2) throw InvalidParameter("sigmoid schedule needs T >= 2");
    if (!(start < end)) throw InvalidParameter("sigmoid schedule needs start < end");
    if (!(tau > 0.0)) throw InvalidParameter("sigmoid schedule needs tau > 0");

    const double lo = logistic(-end / tau);
    const double hi = logistic(-start / tau);

    AlphaSchedule s;
    s.T = T;
    s.alpha.resize(T);
    for (int t = 1; t <= T; ++t) {
        double u = static_cast<double>(t) / T * (end - start) + start;
        double a = (logistic(-u / tau) - lo) / (hi - lo);
        a = std::clamp(a, kAlphaMin, 1.0 - kAlphaGap);
        s.alpha[t - 1] = a;
    }
    // Clamping can produce plateaus at either end; restore strict decrease.
    for (int t = 1; t < T; ++t) {
        if (s.alpha[t] >= s.alpha[t - 1]) s.alpha[t] = s.alpha[t - 1] - 1e-12;
    }
    s.validate();
    return s;
}

AlphaSchedule make_linear_beta_schedule(int T, double beta1, double betaT) {
    if (T < 1) throw InvalidParameter("linear-beta schedule needs T >= 1");
    if (!(beta1 > 0.0 && beta1 <= betaT && betaT < 1.0))
        throw InvalidParameter("linear-beta schedule needs 0 < beta1 <= betaT < 1");

    AlphaSchedule s;
    s.T = T;
    s.alpha.resize(T);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        double beta = T == 1 ? beta1 : beta1 + (betaT - beta1) * (t - 1) / (T - 1);
        prod *= 1.0 - beta;
        s.alpha[t - 1] = prod;
    }
    s.validate();
    return s;
}

SubSequence identity_subsequence(int T) {
    SubSequence sub;
    sub.phi.resize(T + 1);
    std::iota(sub.phi.begin(), sub.phi.end(), 0);
    return sub;
}

SubSequence uniform_subsequence(int T, int T_prime) {
    if (T_prime < 1 || T_prime > T)
        throw InvalidParameter("uniform sub-sequence needs 1 <= T' <= T, got T'=" +
                               std::to_string(T_prime) + ", T=" + std::to_string(T));

    SubSequence sub;
    sub.phi.resize(T_prime + 1);
    for (int t = 0; t <= T_prime; ++t)
        sub.phi[t] = static_cast<int>(std::llround(static_cast<double>(t) * T / T_prime));
    sub.phi[0] = 0;
    sub.phi[T_prime] = T;
    // Rounding collisions: bump upward, then sweep back from the fixed endpoint.
    for (int t = 1; t < T_prime; ++t)
        if (sub.phi[t] <= sub.phi[t - 1]) sub.phi[t] = sub.phi[t - 1] + 1;
    for (int t = T_prime - 1; t >= 1; --t)
        if (sub.phi[t] >= sub.phi[t + 1]) sub.phi[t] = sub.phi[t + 1] - 1;
    sub.validate(T);
    return sub;
}

namespace {

// Draw k distinct values from pool (without replacement), deterministic per engine.
std::vector<int> draw_without_replacement(std::vector<int> pool, std::size_t k, Rng& rng) {
    std::vector<int> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = static_cast<std::size_t>(rng.below(pool.size()));
        out.push_back(pool[j]);
        pool[j] = pool.back();
        pool.pop_back();
    }
    return out;
}

}  // namespace

SubSequence concentrated_subsequence(int T, int T_prime, double fraction, double window,
                                     std::uint64_t seed) {
    if (T_prime < 1 || T_prime > T) throw InvalidParameter("concentrated sub-sequence needs 1 <= T' <= T");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidParameter("fraction must lie in [0, 1]");
    if (!(window > 0.0 && window <= 1.0)) throw InvalidParameter("window must lie in (0, 1]");

    const int n_interior = T_prime - 1;
    int n_conc = static_cast<int>(std::llround(fraction * T_prime));
    n_conc = std::min(n_conc, n_interior);

    const double mid = T / 2.0;
    const int lo = std::max(1, static_cast<int>(std::floor(mid * (1.0 - window))));
    const int hi = std::min(T - 1, static_cast<int>(std::ceil(mid * (1.0 + window))));

    std::vector<int> window_pool, rest_pool;
    for (int i = 1; i <= T - 1; ++i) {
        if (i >= lo && i <= hi)
            window_pool.push_back(i);
        else
            rest_pool.push_back(i);
    }
    if (static_cast<int>(window_pool.size()) < n_conc)
        throw InvalidParameter("window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                               "] holds only " + std::to_string(window_pool.size()) +
                               " indices, need " + std::to_string(n_conc));
    if (static_cast<int>(rest_pool.size()) < n_interior - n_conc)
        throw InvalidParameter("remaining range too small for " +
                               std::to_string(n_interior - n_conc) + " scattered indices");

    Rng rng(mix_seed(seed, 0));
    std::vector<int> interior = draw_without_replacement(std::move(window_pool), n_conc, rng);
    std::vector<int> scattered =
        draw_without_replacement(std::move(rest_pool), n_interior - n_conc, rng);
    interior.insert(interior.end(), scattered.begin(), scattered.end());
    std::sort(interior.begin(), interior.end());

    SubSequence sub;
    sub.phi.reserve(T_prime + 1);
    sub.phi.push_back(0);
    sub.phi.insert(sub.phi.end(), interior.begin(), interior.end());
    sub.phi.push_back(T);
    sub.validate(T);
    return sub;
}

}  // namespace sfd
