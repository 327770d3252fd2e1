#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace qcwarp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

using Face = std::array<std::uint32_t, 3>;

/// Regular triangulation of a width_v x height_v vertex grid.
///
/// Vertex (row i, col j) has index i * width_v + j and sits at (x = j, y = i),
/// i.e. one vertex per pixel centre. Orientation is measured in the (x, y)
/// frame read as the complex plane z = x + iy, so "south" is the smaller row.
/// Each cell (row-major) contributes a lower triangle (SW, SE, NE) followed by
/// an upper triangle (SW, NE, NW); both have positive signed area.
class TriMesh {
 public:
  TriMesh(int width_v, int height_v);

  int width_v() const noexcept { return width_v_; }
  int height_v() const noexcept { return height_v_; }
  int cells_x() const noexcept { return width_v_ - 1; }
  int cells_y() const noexcept { return height_v_ - 1; }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  std::span<const Vec2> vertices() const noexcept { return vertices_; }
  std::span<const Face> faces() const noexcept { return faces_; }

  std::uint32_t vertex_index(int row, int col) const noexcept {
    return static_cast<std::uint32_t>(row * width_v_ + col);
  }
  /// Index of the lower (0) or upper (1) face of cell (row, col).
  std::size_t face_index(int row, int col, int upper) const noexcept {
    return 2 * (static_cast<std::size_t>(row) * cells_x() + col) + upper;
  }
  bool is_boundary(std::uint32_t v) const noexcept;
  std::vector<std::uint32_t> boundary_vertices() const;

  friend bool operator==(const TriMesh& a, const TriMesh& b) {
    return a.width_v_ == b.width_v_ && a.height_v_ == b.height_v_;
  }

 private:
  int width_v_;
  int height_v_;
  std::vector<Vec2> vertices_;
  std::vector<Face> faces_;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Throws invalid-argument when either dimension is below 2.
MeshPtr build_grid_mesh(int width_v, int height_v);

/// Piecewise-linear map given by per-vertex target positions.
class DeformationMap {
 public:
  DeformationMap(MeshPtr mesh, std::vector<Vec2> positions);

  const TriMesh& mesh() const noexcept { return *mesh_; }
  const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
  std::span<const Vec2> positions() const noexcept { return positions_; }
  std::span<Vec2> positions() noexcept { return positions_; }

  /// Evaluate the piecewise-linear map at a point of the reference domain.
  /// Outside the grid the nearest boundary triangle's affine piece is used.
  Vec2 evaluate(Vec2 p) const;

 private:
  MeshPtr mesh_;
  std::vector<Vec2> positions_;
};

DeformationMap identity_map(const MeshPtr& mesh);

struct OrientationCounts {
  std::size_t positive = 0;
  std::size_t degenerate = 0;
  std::size_t flipped = 0;
  friend bool operator==(const OrientationCounts&, const OrientationCounts&) = default;
};

inline constexpr double kDegenerateArea = 1e-12;

double signed_area(Vec2 a, Vec2 b, Vec2 c);

/// Classify every mapped face by the sign of its area (|area| <= 1e-12 px^2
/// counts as degenerate).
OrientationCounts face_orientation_count(const DeformationMap& map);

/// Indices of flipped faces, at most `limit` of them.
std::vector<std::size_t> flipped_faces(const DeformationMap& map, std::size_t limit);

}  // namespace qcwarp
