#include "gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qcwarp::detail {

namespace {

std::vector<double> make_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int t = -radius; t <= radius; ++t) {
    k[t + radius] = std::exp(-0.5 * (t * t) / (sigma * sigma));
  }
  return k;
}

// out[i] = sum_t k[t] in[i + t] / sum_t k[t] over in-range taps
void blur_line(const double* in, double* out, int n, std::ptrdiff_t stride,
               const std::vector<double>& k) {
  const int radius = static_cast<int>(k.size() / 2);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    double wsum = 0.0;
    const int lo = std::max(-radius, -i);
    const int hi = std::min(radius, n - 1 - i);
    for (int t = lo; t <= hi; ++t) {
      acc += k[t + radius] * in[(i + t) * stride];
      wsum += k[t + radius];
    }
    out[i * stride] = acc / wsum;
  }
}

}  // namespace

void gaussian_blur(std::span<double> grid, int width, int height, double sigma) {
  if (!(sigma > 0.0)) return;
  const auto k = make_kernel(sigma);
  std::vector<double> tmp(grid.size());
  for (int r = 0; r < height; ++r) {
    blur_line(grid.data() + static_cast<std::ptrdiff_t>(r) * width,
              tmp.data() + static_cast<std::ptrdiff_t>(r) * width, width, 1, k);
  }
  for (int c = 0; c < width; ++c) {
    blur_line(tmp.data() + c, grid.data() + c, height, width, k);
  }
}

}  // namespace qcwarp::detail
