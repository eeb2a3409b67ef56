#include "sfd/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfd/rng.hpp"

namespace sfd {

std::string noise_scale_name(NoiseScale s) { return s == NoiseScale::Stddev ? "stddev" : "raw"; }

NoiseScale noise_scale_from_name(const std::string& name) {
    if (name == "stddev") return NoiseScale::Stddev;
    if (name == "raw") return NoiseScale::Raw;
    throw InvalidParameter("unknown noise scale: " + name);
}

Matrix ancestral_sample(const ModelBundle& bundle, int n, std::uint64_t seed, NoiseScale scale) {
    if (n < 1) throw InvalidParameter("sample count must be positive");
    bundle.validate();
    const int d = bundle.net.input_dim;
    const int T_prime = bundle.phi.t_prime();
    Matrix out(n, d);

#pragma omp parallel for schedule(dynamic)
    for (int chain = 0; chain < n; ++chain) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(chain)));
        Vec x(d);
        for (int j = 0; j < d; ++j) x[j] = rng.normal();
        for (int t = T_prime; t >= 1; --t) {
            GaussianParams p = reverse_params(bundle.net, bundle.schedule, bundle.phi, t, x);
            double noise_coef =
                scale == NoiseScale::Stddev ? std::sqrt(p.variance) : p.variance;
            for (int j = 0; j < d; ++j) {
                double eps = t > 1 ? rng.normal() : 0.0;
                x[j] = p.mean[j] + noise_coef * eps;
            }
        }
        std::copy(x.begin(), x.end(), out.row(chain));
    }
    return out;
}

Matrix ddim_sample(const ModelBundle& bundle, const Matrix& init_noise) {
    bundle.validate();
    const int d = bundle.net.input_dim;
    if (init_noise.cols != static_cast<std::size_t>(d))
        throw DimensionMismatch("init noise dimension does not match the bundle");
    const int T_prime = bundle.phi.t_prime();
    Matrix out(init_noise.rows, d);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t chain = 0; chain < init_noise.rows; ++chain) {
        Vec x = init_noise.row_vec(chain);
        for (int t = T_prime; t >= 1; --t)
            x = ddim_step(bundle.net, bundle.schedule, bundle.phi, t, x);
        std::copy(x.begin(), x.end(), out.row(chain));
    }
    return out;
}

Matrix interpolate_noises(const Vec& a, const Vec& b, int k, bool* used_lerp) {
    if (k < 2) throw InvalidParameter("interpolation needs k >= 2");
    if (a.size() != b.size()) throw DimensionMismatch("interpolation endpoints differ in dimension");
    if (!all_finite(a) || !all_finite(b)) throw InvalidParameter("non-finite interpolation endpoint");
    const std::size_t d = a.size();
    if (used_lerp) *used_lerp = false;

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);

    Matrix out(k, d);
    std::copy(a.begin(), a.end(), out.row(0));
    std::copy(b.begin(), b.end(), out.row(k - 1));

    double omega = 0.0;
    bool lerp = false;
    if (na == 0.0 || nb == 0.0) {
        lerp = true;  // zero vector has no direction
    } else {
        double cosw = std::clamp(dot / (na * nb), -1.0, 1.0);
        omega = std::acos(cosw);
        if (std::numbers::pi - omega < 1e-9) lerp = true;  // slerp undefined
        if (omega < 1e-12) omega = 0.0;
    }
    if (lerp && used_lerp) *used_lerp = true;

    for (int i = 1; i + 1 < k; ++i) {
        double s = static_cast<double>(i) / (k - 1);
        double wa, wb;
        if (lerp || omega == 0.0) {
            wa = 1.0 - s;
            wb = s;
        } else {
            double sw = std::sin(omega);
            wa = std::sin((1.0 - s) * omega) / sw;
            wb = std::sin(s * omega) / sw;
        }
        double* row = out.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = wa * a[j] + wb * b[j];
    }
    return out;
}

}  // namespace sfd
