#pragma once

#include <cstdint>
#include <vector>

#include "sfd/errors.hpp"

namespace sfd {

// Decreasing noise sequence alpha_1..alpha_T with the alpha_0 = 1 convention.
struct AlphaSchedule {
    int T = 0;
    std::vector<double> alpha;  // alpha[i] holds alpha_{i+1}, i = 0..T-1

    // alpha_t for t in [0, T]; at(0) == 1 exactly.
    double at(int t) const;

    // Throws InvalidParameter on any invariant breach (range, strict decrease).
    void validate() const;
};

// Increasing step indices phi_0..phi_{T'} mapping student steps onto teacher steps.
struct SubSequence {
    std::vector<int> phi;

    int t_prime() const { return static_cast<int>(phi.size()) - 1; }

    // Requires phi_0 = 0, phi_{T'} = T, strict increase.
    void validate(int T) const;
};

// Normalized-logistic schedule, clamped into [1e-5, 1 - 1e-5] and forced
// strictly decreasing.
AlphaSchedule make_sigmoid_schedule(int T, double start = -3.0, double end = 3.0, double tau = 1.0);

// Standard DDPM linear-beta schedule: alpha_t = prod_{s<=t} (1 - beta_s).
AlphaSchedule make_linear_beta_schedule(int T, double beta1, double betaT);

SubSequence identity_subsequence(int T);

// phi_t = round(t*T/T') with endpoints forced and rounding collisions bumped.
SubSequence uniform_subsequence(int T, int T_prime);

// fraction*T_prime interior indices drawn from the midpoint window
// [T/2*(1-window), T/2*(1+window)], the rest uniformly from the remainder
// of [1, T-1]. Deterministic for a fixed seed.
SubSequence concentrated_subsequence(int T, int T_prime, double fraction, double window,
                                     std::uint64_t seed);

}  // namespace sfd
