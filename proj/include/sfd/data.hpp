#pragma once

#include <cstdint>
#include <string>

#include "sfd/linalg.hpp"

namespace sfd {

// Two-turn spiral, standardized to zero mean and unit per-axis variance over
// the generated batch.
Matrix swiss_roll(int n, double noise_std, std::uint64_t seed);

// Uniform component choice, isotropic Gaussian around each center.
Matrix gaussian_mixture(int n, const Matrix& centers, double std_dev, std::uint64_t seed);

// CSV with header x0,...,x{d-1}, LF line endings, 17 significant digits.
Matrix load_csv(const std::string& path);
void save_csv(const std::string& path, const Matrix& m);

}  // namespace sfd
