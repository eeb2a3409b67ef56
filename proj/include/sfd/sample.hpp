#pragma once

#include "sfd/train.hpp"

namespace sfd {

enum class NoiseScale { Stddev, Raw };

std::string noise_scale_name(NoiseScale s);
NoiseScale noise_scale_from_name(const std::string& name);

// Ancestral reverse-chain sampling: start from standard normal noise, step
// through reverse_params with fresh noise per step, last step noiseless.
// Per-chain RNG streams derive from (seed, chain index) so results do not
// depend on evaluation order.
Matrix ancestral_sample(const ModelBundle& bundle, int n, std::uint64_t seed,
                        NoiseScale scale = NoiseScale::Stddev);

// Deterministic trajectory from the given initial noises.
Matrix ddim_sample(const ModelBundle& bundle, const Matrix& init_noise);

// Spherical interpolation at k evenly spaced angles from a to b, endpoints
// exact. Falls back to linear interpolation for antiparallel pairs; when
// used_lerp is non-null it reports the fallback.
Matrix interpolate_noises(const Vec& a, const Vec& b, int k, bool* used_lerp = nullptr);

}  // namespace sfd
