// Timing comparison between the OpenMP kernels and their serial reference
// implementations: batch gradient accumulation and the energy-distance
// pairwise sum.

#include <chrono>
#include <cstdio>

#include "sfd/data.hpp"
#include "sfd/metrics.hpp"
#include "sfd/net.hpp"
#include "sfd/rng.hpp"

using namespace sfd;

namespace {

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_it(F&& f, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    auto t1 = std::chrono::steady_clock::now();
    return seconds(t0, t1) / reps;
}

}  // namespace

int main() {
    Rng rng(42);

    {
        const int n = 256, d = 2;
        EpsilonNet net = make_net(d, {128, 128, 128}, 7);
        Matrix x(n, d), targets(n, d);
        Vec t_norm(n);
        for (int i = 0; i < n; ++i) {
            t_norm[i] = rng.uniform();
            for (int j = 0; j < d; ++j) {
                x(i, j) = rng.normal();
                targets(i, j) = rng.normal();
            }
        }
        double t_par = time_it(
            [&] { loss_and_grads(net, x, t_norm, targets, LossNorm::L2); }, 20);
        double t_ser = time_it(
            [&] { loss_and_grads_serial(net, x, t_norm, targets, LossNorm::L2); }, 20);
        std::printf("loss_and_grads   batch=%d  parallel %.4fs  serial %.4fs  speedup %.2fx\n", n,
                    t_par, t_ser, t_ser / t_par);
    }

    {
        const int n = 4000;
        Matrix a = swiss_roll(n, 0.05, 1);
        Matrix b = swiss_roll(n, 0.05, 2);
        double t_par = time_it([&] { energy_distance(a, b); }, 3);
        double t_ser = time_it([&] { energy_distance_serial(a, b); }, 3);
        std::printf("energy_distance  n=%d  parallel %.4fs  serial %.4fs  speedup %.2fx\n", n,
                    t_par, t_ser, t_ser / t_par);
    }

    return 0;
}
