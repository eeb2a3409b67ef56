#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfd/linalg.hpp"

namespace sfd {

// Anything that evaluates eps(x, t_norm); lets process math run against
// stub predictors in tests as well as real networks.
struct NoisePredictor {
    virtual ~NoisePredictor() = default;
    virtual Vec predict(const Vec& x, double t_norm) const = 0;
};

enum class Activation { SmoothGated };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
    Matrix w;  // out x in
    Vec b;
};

// MLP noise-prediction network with sinusoidal time embedding. Shared
// architecture for teacher and student.
struct EpsilonNet : NoisePredictor {
    int input_dim = 0;
    int time_embed_dim = 0;
    std::vector<int> hidden_widths;
    Activation activation = Activation::SmoothGated;
    std::vector<Layer> layers;

    Vec predict(const Vec& x, double t_norm) const override;
    void validate() const;
    std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, seeded.
EpsilonNet make_net(int input_dim, const std::vector<int>& hidden_widths, std::uint64_t seed,
                    int time_embed_dim = 32);

// Sinusoidal features of t_norm in [0,1] at geometric frequencies 1..1e4.
Vec time_embedding(double t_norm, int embed_dim);

enum class LossNorm { L1, L2 };

std::string loss_norm_name(LossNorm n);
LossNorm loss_norm_from_name(const std::string& name);

// Parameter-shaped gradient accumulator.
using Gradients = std::vector<Layer>;

Gradients zero_gradients(const EpsilonNet& net);

struct LossResult {
    double loss = 0.0;
    Gradients grads;
};

// Mean over the batch of per-sample ||target - net(x, t)|| under the chosen
// norm (l2 = squared Euclidean, l1 = sum of absolute differences), with exact
// reverse-mode gradients. Optional per-sample weights scale each term.
// Accumulation is blocked by sample index so the result is independent of the
// OpenMP thread count.
LossResult loss_and_grads(const EpsilonNet& net, const Matrix& batch_x, const Vec& batch_t_norm,
                          const Matrix& targets, LossNorm norm, const Vec* weights = nullptr);

// Plain sequential accumulation; reference implementation for tests and the
// benchmark.
LossResult loss_and_grads_serial(const EpsilonNet& net, const Matrix& batch_x,
                                 const Vec& batch_t_norm, const Matrix& targets, LossNorm norm,
                                 const Vec* weights = nullptr);

struct AdamState {
    long step_count = 0;
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Gradients first_moment;
    Gradients second_moment;
};

AdamState make_adam_state(const EpsilonNet& net, double lr);

// Standard Adam update with bias correction; mutates net and state.
void adam_step(EpsilonNet& net, AdamState& state, const Gradients& grads);

}  // namespace sfd
