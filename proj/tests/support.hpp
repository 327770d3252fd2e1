// Shared fixtures for the test binaries: seeded field generators and small
// numeric helpers. Nothing here calls back into the code under test except
// where a generator needs compute_beltrami to measure its own output.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gaussian.hpp"
#include "qcwarp/beltrami.hpp"
#include "qcwarp/image.hpp"
#include "qcwarp/mesh.hpp"
#include "qcwarp/rng.hpp"

namespace qcwarp::testing {

inline constexpr std::uint64_t kFieldStream = 7;
inline constexpr std::uint64_t kModeStream = 9;

/// Stationary smooth complex field: white noise on a grid padded by 3 sigma,
/// blurred, cropped, then scaled so that sup |mu| equals `sup` exactly.
inline BeltramiField smooth_random_field(const MeshPtr& mesh, std::uint64_t seed, double sup,
                                         double sigma = 8.0) {
  const int cx = mesh->cells_x();
  const int cy = mesh->cells_y();
  const int pad = static_cast<int>(std::ceil(3.0 * sigma));
  const int px = cx + 2 * pad;
  const int py = cy + 2 * pad;
  const CounterRng rng(seed, kFieldStream);
  std::vector<double> re(static_cast<std::size_t>(px) * py);
  std::vector<double> im(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    re[i] = rng.normal(2 * i);
    im[i] = rng.normal(2 * i + 1);
  }
  detail::gaussian_blur(re, px, py, sigma);
  detail::gaussian_blur(im, px, py, sigma);
  std::vector<Complex> cells(static_cast<std::size_t>(cx) * cy);
  double peak = 0.0;
  for (int r = 0; r < cy; ++r) {
    for (int c = 0; c < cx; ++c) {
      const std::size_t j = static_cast<std::size_t>(r + pad) * px + c + pad;
      cells[static_cast<std::size_t>(r) * cx + c] = {re[j], im[j]};
      peak = std::max(peak, std::abs(cells[static_cast<std::size_t>(r) * cx + c]));
    }
  }
  for (auto& z : cells) z *= sup / peak;
  return BeltramiField::from_cell_grid(mesh, cells);
}

/// Smooth boundary-fixing map: identity plus scale * a random combination of
/// sin(m pi x / W) sin(n pi y / H) modes, m, n <= 3, weighted 1 / (m n).
inline DeformationMap sine_mode_map(const MeshPtr& mesh, std::uint64_t seed, double scale) {
  const CounterRng rng(seed, kModeStream);
  const double lx = mesh->width_v() - 1;
  const double ly = mesh->height_v() - 1;
  std::vector<Vec2> pos(mesh->vertices().begin(), mesh->vertices().end());
  for (auto& p : pos) {
    Vec2 d{};
    std::uint64_t k = 0;
    for (int m = 1; m <= 3; ++m) {
      for (int n = 1; n <= 3; ++n) {
        const double b = std::sin(m * std::numbers::pi * p.x / lx) * std::sin(n * std::numbers::pi * p.y / ly) / (m * n);
        d.x += rng.normal(k++) * b;
        d.y += rng.normal(k++) * b;
      }
    }
    p = p + scale * d;
  }
  return DeformationMap(mesh, std::move(pos));
}

struct MapAndField {
  DeformationMap map;
  BeltramiField field;
};

/// A Beltrami field realisable with the identity boundary: the coefficient of
/// a sine-mode map whose amplitude is bisected so sup |mu| lands just below `sup`.
inline MapAndField boundary_compatible_field(const MeshPtr& mesh, std::uint64_t seed, double sup) {
  double lo = 0.0;
  double hi = 64.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto g = sine_mode_map(mesh, seed, mid);
    const bool ok = face_orientation_count(g).flipped == 0 && sup_norm(compute_beltrami(g)) <= sup;
    (ok ? lo : hi) = mid;
  }
  auto g = sine_mode_map(mesh, seed, lo);
  auto mu = compute_beltrami(g);
  return {std::move(g), std::move(mu)};
}

inline double max_vertex_error(const DeformationMap& a, const DeformationMap& b) {
  double e = 0.0;
  for (std::size_t v = 0; v < a.positions().size(); ++v) {
    const Vec2 d = a.positions()[v] - b.positions()[v];
    e = std::max(e, std::hypot(d.x, d.y));
  }
  return e;
}

inline double max_field_error(const BeltramiField& a, const BeltramiField& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a.values()[k] - b.values()[k]));
  return e;
}

inline DeformationMap mapped(const MeshPtr& mesh, auto&& fn) {
  std::vector<Vec2> pos;
  pos.reserve(mesh->vertex_count());
  for (const Vec2 p : mesh->vertices()) pos.push_back(fn(p));
  return DeformationMap(mesh, std::move(pos));
}

/// f(z) = a z + b conj(z) + c in (x, y) form.
inline DeformationMap complex_affine(const MeshPtr& mesh, Complex a, Complex b, Complex c = {}) {
  return mapped(mesh, [&](Vec2 p) {
    const Complex z{p.x, p.y};
    const Complex w = a * z + b * std::conj(z) + c;
    return Vec2{w.real(), w.imag()};
  });
}

/// Sum of two ramps and a sinusoid: smooth, non-constant, values in [0, 1].
inline RasterImage gradient_image(int w, int h, int channels = 1) {
  RasterImage img(w, h, channels);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const double v = 0.25 + 0.2 * c / w + 0.2 * r / h + 0.15 * std::sin(0.3 * c + 0.2 * r + ch);
        img.at(r, c, ch) = v;
      }
    }
  }
  return img;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace qcwarp::testing
