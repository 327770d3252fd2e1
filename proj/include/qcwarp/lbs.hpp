#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qcwarp/beltrami.hpp"
#include "qcwarp/mesh.hpp"

namespace qcwarp {

/// Entries of the symmetric diffusion tensor A = [[a1, a2], [a2, a3]].
struct AlphaCoefficients {
  double a1 = 1.0;
  double a2 = 0.0;
  double a3 = 1.0;
};

/// Throws inadmissible-coefficient when |mu| >= 1.
AlphaCoefficients alpha_coefficients(Complex mu);

struct BoundaryCondition {
  enum class Kind { IdentityBoundary, LandmarkSet };

  Kind kind = Kind::LandmarkSet;
  std::vector<std::pair<std::uint32_t, Vec2>> constraints;

  /// Every mesh boundary vertex pinned to its reference position.
  static BoundaryCondition identity_boundary(const TriMesh& mesh);
  /// Boundary vertices pinned to where `map` sends them.
  static BoundaryCondition boundary_of(const DeformationMap& map);
  static BoundaryCondition landmarks(std::vector<std::pair<std::uint32_t, Vec2>> constraints);
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// |mu| allowed at assembly time.
inline constexpr double kAssemblyAdmissibility = 1.0 - 1e-6;

/// Discretised elliptic system of the Linear Beltrami Solver. The u and v
/// equations share one operator; it is stored under both names.
struct LbsSystem {
  MeshPtr mesh;
  SparseMatrix c1;
  SparseMatrix c2;
  BoundaryCondition bc;
  /// true for vertices fixed by bc
  std::vector<bool> constrained;
};

LbsSystem assemble(const MeshPtr& mesh, const BeltramiField& field, BoundaryCondition bc);

struct SolveOptions {
  double relative_tolerance = 1e-10;
  /// Iteration cap as a multiple of the vertex count.
  int iteration_factor = 20;
};

struct SolveStats {
  long iterations_u = 0;
  long iterations_v = 0;
  double relative_residual_u = 0.0;
  double relative_residual_v = 0.0;
};

/// Solve both reduced systems with diagonally preconditioned CG. An
/// optional initial guess (e.g. the previous iterate) warm-starts CG.
DeformationMap solve(const LbsSystem& system, const std::optional<DeformationMap>& guess = {},
                     const SolveOptions& options = {}, SolveStats* stats = nullptr);

/// ||C1 u||_1 + ||C2 v||_1 over unconstrained rows.
double residual_loss(const LbsSystem& system, const DeformationMap& map);

/// assemble + solve with the identity boundary.
DeformationMap lbs_reconstruct(const BeltramiField& field,
                               const std::optional<DeformationMap>& guess = {});

}  // namespace qcwarp
