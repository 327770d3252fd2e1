#include "qcwarp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "json.hpp"
#include "qcwarp/error.hpp"

namespace qcwarp {

namespace {

void check_same_shape(const RasterImage& a, const RasterImage& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::InvalidArgument, "images differ in shape");
  }
}

// Separable weighted mean of `plane` with per-pixel renormalisation.
std::vector<double> local_mean(const std::vector<double>& plane, int w, int h,
                               const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(plane.size());
  std::vector<double> out(plane.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      double ws = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const int cc = c + t;
        if (cc < 0 || cc >= w) continue;
        acc += kernel[t + radius] * plane[static_cast<std::size_t>(r) * w + cc];
        ws += kernel[t + radius];
      }
      tmp[static_cast<std::size_t>(r) * w + c] = acc / ws;
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      double ws = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const int rr = r + t;
        if (rr < 0 || rr >= h) continue;
        acc += kernel[t + radius] * tmp[static_cast<std::size_t>(rr) * w + c];
        ws += kernel[t + radius];
      }
      out[static_cast<std::size_t>(r) * w + c] = acc / ws;
    }
  }
  return out;
}

}  // namespace

double mse(const RasterImage& a, const RasterImage& b) {
  check_same_shape(a, b);
  const auto da = a.data();
  const auto db = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return da.empty() ? 0.0 : acc / static_cast<double>(da.size());
}

double psnr_from_mse(double m) { return m > 0.0 ? 10.0 * std::log10(1.0 / m) : kPsnrCap; }

double ssim(const RasterImage& a, const RasterImage& b, const SsimOptions& opt) {
  check_same_shape(a, b);
  const int w = a.width();
  const int h = a.height();
  std::vector<double> kernel(static_cast<std::size_t>(opt.window));
  const int radius = opt.window / 2;
  for (int t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-0.5 * t * t / (opt.sigma * opt.sigma));
  }
  const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
  const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);
  const std::size_t n = static_cast<std::size_t>(w) * h;

  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        pa[i] = a.at(r, c, ch);
        pb[i] = b.at(r, c, ch);
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
      }
    }
    const auto mu_a = local_mean(pa, w, h, kernel);
    const auto mu_b = local_mean(pb, w, h, kernel);
    const auto e_aa = local_mean(aa, w, h, kernel);
    const auto e_bb = local_mean(bb, w, h, kernel);
    const auto e_ab = local_mean(ab, w, h, kernel);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(n);
  }
  return total / a.channels();
}

MetricReport evaluate(const RasterImage& a, const RasterImage& b) {
  check_same_shape(a, b);
  MetricReport rep;
  rep.mse = mse(a, b);
  rep.psnr = psnr_from_mse(rep.mse);
  rep.ssim = ssim(a, b);
  return rep;
}

std::string to_json_string(const MetricReport& report) {
  const nlohmann::json j = {{"mse", report.mse}, {"psnr", report.psnr}, {"ssim", report.ssim}};
  return j.dump(2);
}

std::string csv_header() { return "mse,psnr,ssim"; }

std::string to_csv_row(const MetricReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", report.mse, report.psnr, report.ssim);
  return buf;
}

}  // namespace qcwarp
