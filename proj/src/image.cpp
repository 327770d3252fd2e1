#include "qcwarp/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcwarp/error.hpp"

namespace qcwarp {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw Error(ErrorKind::InvalidArgument,
                "bad image shape " + std::to_string(width) + "x" + std::to_string(height) + "x" +
                    std::to_string(channels));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::InvalidArgument, "image data length does not match its shape");
  }
}

double RasterImage::sample(double x, double y, int ch) const noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), std::max(width_ - 2, 0));
  const int y0 = std::min(static_cast<int>(y), std::max(height_ - 2, 0));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double a = at(y0, x0, ch);
  const double b = at(y0, x1, ch);
  const double c = at(y1, x0, ch);
  const double d = at(y1, x1, ch);
  return (1.0 - fx) * (1.0 - fy) * a + fx * (1.0 - fy) * b + (1.0 - fx) * fy * c + fx * fy * d;
}

RasterImage RasterImage::channel(int ch) const {
  RasterImage out(width_, height_, 1);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) out.at(r, c) = at(r, c, ch);
  }
  return out;
}

RasterImage downsample2(const RasterImage& image) {
  const int w = std::max(1, image.width() / 2);
  const int h = std::max(1, image.height() / 2);
  RasterImage out(w, h, image.channels());
  std::vector<int> count(static_cast<std::size_t>(w) * h, 0);
  for (int r = 0; r < image.height(); ++r) {
    const int rr = std::min(r / 2, h - 1);
    for (int c = 0; c < image.width(); ++c) {
      const int cc = std::min(c / 2, w - 1);
      ++count[static_cast<std::size_t>(rr) * w + cc];
      for (int ch = 0; ch < image.channels(); ++ch) out.at(rr, cc, ch) += image.at(r, c, ch);
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double n = count[static_cast<std::size_t>(r) * w + c];
      for (int ch = 0; ch < image.channels(); ++ch) out.at(r, c, ch) /= n;
    }
  }
  return out;
}

}  // namespace qcwarp
