#include "qcwarp/beltrami.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "gaussian.hpp"
#include "qcwarp/error.hpp"

namespace qcwarp {

BeltramiField::BeltramiField(MeshPtr mesh, std::vector<Complex> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw Error(ErrorKind::InvalidArgument, "Beltrami field without mesh");
  if (values_.size() != mesh_->face_count()) {
    throw Error(ErrorKind::InvalidArgument,
                "Beltrami field has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(mesh_->face_count()) + " faces");
  }
  for (const auto& mu : values_) {
    if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) {
      throw Error(ErrorKind::InvalidArgument, "Beltrami field has non-finite entry");
    }
  }
}

BeltramiField::BeltramiField(MeshPtr mesh)
    : BeltramiField(mesh, std::vector<Complex>(mesh ? mesh->face_count() : 0)) {}

std::vector<Complex> BeltramiField::to_cell_grid() const {
  std::vector<Complex> cells(values_.size() / 2);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c] = 0.5 * (values_[2 * c] + values_[2 * c + 1]);
  }
  return cells;
}

BeltramiField BeltramiField::from_cell_grid(MeshPtr mesh, std::span<const Complex> cells) {
  if (cells.size() * 2 != mesh->face_count()) {
    throw Error(ErrorKind::InvalidArgument, "cell grid size does not match mesh");
  }
  std::vector<Complex> values(mesh->face_count());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    values[2 * c] = cells[c];
    values[2 * c + 1] = cells[c];
  }
  return BeltramiField(std::move(mesh), std::move(values));
}

std::pair<Complex, Complex> face_wirtinger(const DeformationMap& map, std::size_t face) {
  const auto& mesh = map.mesh();
  const auto& f = mesh.faces()[face];
  const auto ref = mesh.vertices();
  const auto pos = map.positions();

  const Vec2 e1 = ref[f[1]] - ref[f[0]];
  const Vec2 e2 = ref[f[2]] - ref[f[0]];
  const double det = cross(e1, e2);
  if (std::abs(det) <= 0.0) {
    throw Error(ErrorKind::InvalidMesh, "reference face " + std::to_string(face) + " has zero area");
  }
  const Vec2 d1 = pos[f[1]] - pos[f[0]];
  const Vec2 d2 = pos[f[2]] - pos[f[0]];
  // [e1; e2] * grad = [d1; d2] per coordinate function
  const double ux = (e2.y * d1.x - e1.y * d2.x) / det;
  const double uy = (e1.x * d2.x - e2.x * d1.x) / det;
  const double vx = (e2.y * d1.y - e1.y * d2.y) / det;
  const double vy = (e1.x * d2.y - e2.x * d1.y) / det;

  const Complex fz(0.5 * (ux + vy), 0.5 * (vx - uy));
  const Complex fzbar(0.5 * (ux - vy), 0.5 * (vx + uy));
  return {fz, fzbar};
}

BeltramiField compute_beltrami(const DeformationMap& map) {
  const std::size_t m = map.mesh().face_count();
  std::vector<Complex> mu(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto [fz, fzbar] = face_wirtinger(map, k);
    if (std::abs(fz) < kDegenerateDz) {
      throw DegenerateMapError(k, "map is degenerate on face " + std::to_string(k) +
                                      " (|f_z| below threshold)");
    }
    mu[k] = fzbar / fz;
  }
  return BeltramiField(map.mesh_ptr(), std::move(mu));
}

Complex squash(Complex mu, double margin) {
  const double r = std::abs(mu);
  if (r == 0.0) return {0.0, 0.0};
  const double target = std::min(std::tanh(r), 1.0 - margin);
  // positive real scaling keeps the phase; step down past rounding overshoot
  double scale = target / r;
  Complex out = mu * scale;
  while (std::abs(out) > target) {
    scale = std::nextafter(scale, 0.0);
    out = mu * scale;
  }
  return out;
}

BeltramiField squash_activation(const BeltramiField& field, double margin) {
  if (!(margin > 0.0 && margin < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "admissibility margin must lie in (0, 1)");
  }
  std::vector<Complex> out(field.size());
  std::transform(field.values().begin(), field.values().end(), out.begin(),
                 [margin](Complex mu) { return squash(mu, margin); });
  return BeltramiField(field.mesh_ptr(), std::move(out));
}

double sup_norm(const BeltramiField& field) {
  double s = 0.0;
  for (const auto& mu : field.values()) s = std::max(s, std::abs(mu));
  return s;
}

BeltramiField smooth_field(const BeltramiField& field, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "smoothing sigma must be >= 0");
  const auto& mesh = field.mesh();
  auto cells = field.to_cell_grid();
  if (sigma > 0.0) {
    std::vector<double> rho(cells.size());
    std::vector<double> tau(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      rho[c] = cells[c].real();
      tau[c] = cells[c].imag();
    }
    detail::gaussian_blur(rho, mesh.cells_x(), mesh.cells_y(), sigma);
    detail::gaussian_blur(tau, mesh.cells_x(), mesh.cells_y(), sigma);
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = {rho[c], tau[c]};
  }
  return BeltramiField::from_cell_grid(field.mesh_ptr(), cells);
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Signed frequency of DFT bin `i` of an n-point transform, in [-n/2, n/2).
int signed_frequency(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

bool in_low_block(int freq, int k) { return freq >= -(k / 2) && freq <= (k + 1) / 2 - 1; }

}  // namespace

BeltramiField fourier_truncate(const BeltramiField& field, int k) {
  const auto& mesh = field.mesh();
  const int cols = mesh.cells_x();
  const int rows = mesh.cells_y();
  if (k < 1 || k > std::min(cols, rows)) {
    throw Error(ErrorKind::InvalidArgument,
                "truncation size " + std::to_string(k) + " outside [1, " +
                    std::to_string(std::min(cols, rows)) + "]");
  }
  auto cells = field.to_cell_grid();
  const std::size_t n = cells.size();
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan fwd;
  fftw_plan inv;
  {
    std::lock_guard lock(fftw_plan_mutex());
    fwd = fftw_plan_dft_2d(rows, cols, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_2d(rows, cols, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = cells[i].real();
    buf[i][1] = cells[i].imag();
  }
  fftw_execute(fwd);
  for (int r = 0; r < rows; ++r) {
    const bool keep_r = in_low_block(signed_frequency(r, rows), k);
    for (int c = 0; c < cols; ++c) {
      if (!keep_r || !in_low_block(signed_frequency(c, cols), k)) {
        auto& z = buf[static_cast<std::size_t>(r) * cols + c];
        z[0] = 0.0;
        z[1] = 0.0;
      }
    }
  }
  fftw_execute(inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) cells[i] = {buf[i][0] * scale, buf[i][1] * scale};
  {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  return BeltramiField::from_cell_grid(field.mesh_ptr(), cells);
}

}  // namespace qcwarp
