#pragma once

#include <string>

#include "qcwarp/image.hpp"

namespace qcwarp {

struct MetricReport {
  double mse = 0.0;
  double psnr = 0.0;  // dB, peak 1
  double ssim = 1.0;
};

/// Reported PSNR for identical images.
inline constexpr double kPsnrCap = 99.0;

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

double mse(const RasterImage& a, const RasterImage& b);
double psnr_from_mse(double mse);
/// Mean SSIM over pixels with a Gaussian window (renormalised at the
/// borders), averaged over channels.
double ssim(const RasterImage& a, const RasterImage& b, const SsimOptions& options = {});

/// Throws invalid-argument on shape mismatch.
MetricReport evaluate(const RasterImage& a, const RasterImage& b);

std::string to_json_string(const MetricReport& report);
std::string csv_header();
std::string to_csv_row(const MetricReport& report);

}  // namespace qcwarp
