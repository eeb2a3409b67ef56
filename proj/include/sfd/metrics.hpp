#pragma once

#include "sfd/train.hpp"

namespace sfd {

// Energy distance V-statistic: 2 E||a-b|| - E||a-a'|| - E||b-b'|| with exact
// pairwise means. Symmetric, >= 0, 0 on identical samples.
double energy_distance(const Matrix& a, const Matrix& b);

// Naive sequential accumulation, kept as reference for the parallel kernel.
double energy_distance_serial(const Matrix& a, const Matrix& b);

// Mean over random unit directions of the 1-D 2-Wasserstein distance between
// projected samples. Equal sizes required; deterministic per seed.
double sliced_wasserstein(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed);

struct ConsistencyScore {
    double paired_mse = 0.0;
    double random_baseline_mse = 0.0;
};

// DDIM both models through identical noises; paired MSE vs a permuted
// baseline. Distillation succeeded when paired << baseline.
ConsistencyScore consistency_score(const ModelBundle& teacher, const ModelBundle& student, int n,
                                   std::uint64_t seed);

}  // namespace sfd
