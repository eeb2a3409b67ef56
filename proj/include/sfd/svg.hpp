#pragma once

#include <string>

#include "sfd/linalg.hpp"

namespace sfd {

// Self-contained SVG scatter plot of the first two columns; pure text output.
void write_scatter_svg(const std::string& path, const Matrix& points, int size_px = 640);

}  // namespace sfd
