#include "qcwarp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcwarp/error.hpp"

namespace qcwarp {

TriMesh::TriMesh(int width_v, int height_v) : width_v_(width_v), height_v_(height_v) {
  if (width_v < 2 || height_v < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "grid mesh needs at least 2x2 vertices, got " + std::to_string(width_v) + "x" +
                    std::to_string(height_v));
  }
  vertices_.reserve(static_cast<std::size_t>(width_v) * height_v);
  for (int i = 0; i < height_v; ++i) {
    for (int j = 0; j < width_v; ++j) {
      vertices_.push_back({static_cast<double>(j), static_cast<double>(i)});
    }
  }
  faces_.reserve(2 * static_cast<std::size_t>(cells_x()) * cells_y());
  for (int r = 0; r < cells_y(); ++r) {
    for (int c = 0; c < cells_x(); ++c) {
      const auto sw = vertex_index(r, c);
      const auto se = vertex_index(r, c + 1);
      const auto ne = vertex_index(r + 1, c + 1);
      const auto nw = vertex_index(r + 1, c);
      faces_.push_back({sw, se, ne});
      faces_.push_back({sw, ne, nw});
    }
  }
}

bool TriMesh::is_boundary(std::uint32_t v) const noexcept {
  const int i = static_cast<int>(v) / width_v_;
  const int j = static_cast<int>(v) % width_v_;
  return i == 0 || j == 0 || i == height_v_ - 1 || j == width_v_ - 1;
}

std::vector<std::uint32_t> TriMesh::boundary_vertices() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < vertex_count(); ++v) {
    if (is_boundary(v)) out.push_back(v);
  }
  return out;
}

MeshPtr build_grid_mesh(int width_v, int height_v) {
  return std::make_shared<const TriMesh>(width_v, height_v);
}

DeformationMap::DeformationMap(MeshPtr mesh, std::vector<Vec2> positions)
    : mesh_(std::move(mesh)), positions_(std::move(positions)) {
  if (!mesh_) throw Error(ErrorKind::InvalidArgument, "deformation map without mesh");
  if (positions_.size() != mesh_->vertex_count()) {
    throw Error(ErrorKind::InvalidArgument,
                "deformation map has " + std::to_string(positions_.size()) +
                    " positions for a mesh of " + std::to_string(mesh_->vertex_count()) +
                    " vertices");
  }
  for (const auto& p : positions_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::InvalidArgument, "deformation map has non-finite position");
    }
  }
}

Vec2 DeformationMap::evaluate(Vec2 p) const {
  const auto& m = *mesh_;
  // The triangle is picked from the clamped point; its affine piece is then
  // evaluated at p itself, so points outside the grid extrapolate linearly.
  const double x = std::clamp(p.x, 0.0, static_cast<double>(m.width_v() - 1));
  const double y = std::clamp(p.y, 0.0, static_cast<double>(m.height_v() - 1));
  const int c = std::min(static_cast<int>(std::floor(x)), m.cells_x() - 1);
  const int r = std::min(static_cast<int>(std::floor(y)), m.cells_y() - 1);
  const double fx = p.x - c;
  const double fy = p.y - r;
  const Vec2 sw = positions_[m.vertex_index(r, c)];
  const Vec2 ne = positions_[m.vertex_index(r + 1, c + 1)];
  if (y - r <= x - c) {
    const Vec2 se = positions_[m.vertex_index(r, c + 1)];
    return (1.0 - fx) * sw + (fx - fy) * se + fy * ne;
  }
  const Vec2 nw = positions_[m.vertex_index(r + 1, c)];
  return (1.0 - fy) * sw + fx * ne + (fy - fx) * nw;
}

DeformationMap identity_map(const MeshPtr& mesh) {
  const auto v = mesh->vertices();
  return DeformationMap(mesh, std::vector<Vec2>(v.begin(), v.end()));
}

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

OrientationCounts face_orientation_count(const DeformationMap& map) {
  OrientationCounts counts;
  const auto pos = map.positions();
  for (const auto& f : map.mesh().faces()) {
    const double area = signed_area(pos[f[0]], pos[f[1]], pos[f[2]]);
    if (std::abs(area) <= kDegenerateArea) {
      ++counts.degenerate;
    } else if (area > 0.0) {
      ++counts.positive;
    } else {
      ++counts.flipped;
    }
  }
  return counts;
}

std::vector<std::size_t> flipped_faces(const DeformationMap& map, std::size_t limit) {
  std::vector<std::size_t> out;
  const auto pos = map.positions();
  const auto faces = map.mesh().faces();
  for (std::size_t k = 0; k < faces.size() && out.size() < limit; ++k) {
    const auto& f = faces[k];
    if (signed_area(pos[f[0]], pos[f[1]], pos[f[2]]) < -kDegenerateArea) out.push_back(k);
  }
  return out;
}

}  // namespace qcwarp
