#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcwarp {

/// Row-major, channel-interleaved intensity grid with samples nominally in [0, 1].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, double fill = 0.0);
  RasterImage(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double at(int row, int col, int ch = 0) const noexcept { return data_[index(row, col, ch)]; }
  double& at(int row, int col, int ch = 0) noexcept { return data_[index(row, col, ch)]; }

  /// Bilinear sample at (x, y) = (col, row) with border clamping.
  double sample(double x, double y, int ch = 0) const noexcept;

  RasterImage channel(int ch) const;
  bool same_shape(const RasterImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

/// 2x2 box downsampling (odd trailing row/column folded into the last cell).
RasterImage downsample2(const RasterImage& image);

}  // namespace qcwarp
