#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qcwarp/mesh.hpp"

namespace qcwarp {

using Complex = std::complex<double>;

/// One Beltrami coefficient mu = rho + i tau per face, in canonical face order.
class BeltramiField {
 public:
  BeltramiField(MeshPtr mesh, std::vector<Complex> values);
  /// Zero field on `mesh`.
  explicit BeltramiField(MeshPtr mesh);

  const TriMesh& mesh() const noexcept { return *mesh_; }
  const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Cell-grid view: row-major (cells_y x cells_x), each cell the mean of
  /// its two faces.
  std::vector<Complex> to_cell_grid() const;
  /// Inverse of to_cell_grid: every cell value is copied to both faces.
  static BeltramiField from_cell_grid(MeshPtr mesh, std::span<const Complex> cells);

 private:
  MeshPtr mesh_;
  std::vector<Complex> values_;
};

/// Threshold on |f_z| below which a mapped face counts as degenerate.
inline constexpr double kDegenerateDz = 1e-14;

/// Per-face Beltrami coefficient mu = f_zbar / f_z of a piecewise-linear map.
/// Throws DegenerateMapError naming the face when |f_z| < 1e-14.
BeltramiField compute_beltrami(const DeformationMap& map);

/// Wirtinger derivatives (f_z, f_zbar) of the map restricted to one face.
std::pair<Complex, Complex> face_wirtinger(const DeformationMap& map, std::size_t face);

/// tanh(|mu|) * mu / |mu|, then clamped to magnitude 1 - margin.
Complex squash(Complex mu, double margin);
BeltramiField squash_activation(const BeltramiField& field, double margin = 1e-3);

double sup_norm(const BeltramiField& field);

/// Gaussian blur (sigma in cells) of rho and tau on the cell grid.
BeltramiField smooth_field(const BeltramiField& field, double sigma);

/// Keep only the centred k x k block of low frequencies of the cell-grid DFT.
BeltramiField fourier_truncate(const BeltramiField& field, int k);

}  // namespace qcwarp
