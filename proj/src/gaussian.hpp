#pragma once

#include <span>

namespace qcwarp::detail {

// Separable Gaussian blur of a row-major width x height grid, in place.
// The kernel is truncated at ceil(3 sigma) and renormalised by the weight
// that falls inside the grid, so constants are preserved. sigma <= 0 is a
// no-op.
void gaussian_blur(std::span<double> grid, int width, int height, double sigma);

}  // namespace qcwarp::detail
