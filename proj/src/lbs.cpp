#include "qcwarp/lbs.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <string>

#include "qcwarp/error.hpp"

namespace qcwarp {

AlphaCoefficients alpha_coefficients(Complex mu) {
  const double rho = mu.real();
  const double tau = mu.imag();
  const double denom = 1.0 - rho * rho - tau * tau;
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::InadmissibleCoefficient,
                "Beltrami coefficient with |mu| >= 1 has no elliptic system");
  }
  return {((rho - 1.0) * (rho - 1.0) + tau * tau) / denom, -2.0 * tau / denom,
          ((rho + 1.0) * (rho + 1.0) + tau * tau) / denom};
}

BoundaryCondition BoundaryCondition::identity_boundary(const TriMesh& mesh) {
  BoundaryCondition bc;
  bc.kind = Kind::IdentityBoundary;
  const auto ref = mesh.vertices();
  for (auto v : mesh.boundary_vertices()) bc.constraints.emplace_back(v, ref[v]);
  return bc;
}

BoundaryCondition BoundaryCondition::boundary_of(const DeformationMap& map) {
  BoundaryCondition bc;
  const auto pos = map.positions();
  for (auto v : map.mesh().boundary_vertices()) bc.constraints.emplace_back(v, pos[v]);
  return bc;
}

BoundaryCondition BoundaryCondition::landmarks(
    std::vector<std::pair<std::uint32_t, Vec2>> constraints) {
  BoundaryCondition bc;
  bc.constraints = std::move(constraints);
  return bc;
}

LbsSystem assemble(const MeshPtr& mesh, const BeltramiField& field, BoundaryCondition bc) {
  if (!(field.mesh() == *mesh)) {
    throw Error(ErrorKind::InvalidArgument, "Beltrami field belongs to a different mesh");
  }
  if (bc.constraints.empty()) {
    throw Error(ErrorKind::UnderdeterminedSystem, "no boundary or landmark constraints given");
  }
  const std::size_t n = mesh->vertex_count();
  std::vector<bool> constrained(n, false);
  for (const auto& [v, target] : bc.constraints) {
    if (v >= n) {
      throw Error(ErrorKind::InvalidArgument, "constraint vertex " + std::to_string(v) + " out of range");
    }
    if (constrained[v]) {
      throw Error(ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " constrained twice");
    }
    if (!std::isfinite(target.x) || !std::isfinite(target.y)) {
      throw Error(ErrorKind::InvalidArgument, "constraint target is not finite");
    }
    constrained[v] = true;
  }

  const auto ref = mesh->vertices();
  const auto faces = mesh->faces();
  const auto mu = field.values();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(faces.size() * 9);
  for (std::size_t k = 0; k < faces.size(); ++k) {
    if (std::abs(mu[k]) > kAssemblyAdmissibility) {
      throw Error(ErrorKind::InadmissibleCoefficient,
                  "face " + std::to_string(k) + " has |mu| = " + std::to_string(std::abs(mu[k])) +
                      " above the admissibility margin");
    }
    const auto a = alpha_coefficients(mu[k]);
    const auto& f = faces[k];
    const double area = signed_area(ref[f[0]], ref[f[1]], ref[f[2]]);
    // area * grad(phi_i) = 0.5 * (y_{i+1} - y_{i+2}, x_{i+2} - x_{i+1})
    Vec2 g[3];
    for (int i = 0; i < 3; ++i) {
      const Vec2 p1 = ref[f[(i + 1) % 3]];
      const Vec2 p2 = ref[f[(i + 2) % 3]];
      g[i] = {0.5 * (p1.y - p2.y), 0.5 * (p2.x - p1.x)};
    }
    for (int i = 0; i < 3; ++i) {
      const Vec2 ag{a.a1 * g[i].x + a.a2 * g[i].y, a.a2 * g[i].x + a.a3 * g[i].y};
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(f[i], f[j], (ag.x * g[j].x + ag.y * g[j].y) / area);
      }
    }
  }
  LbsSystem sys;
  sys.mesh = mesh;
  sys.c1.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sys.c1.setFromTriplets(triplets.begin(), triplets.end());
  sys.c1.makeCompressed();
  sys.c2 = sys.c1;
  sys.bc = std::move(bc);
  sys.constrained = std::move(constrained);
  return sys;
}

namespace {

struct Reduced {
  SparseMatrix matrix;
  Eigen::VectorXd rhs_u;
  Eigen::VectorXd rhs_v;
  std::vector<Eigen::Index> slot;  // vertex -> reduced index, -1 when constrained
  std::vector<std::uint32_t> free;
};

Reduced reduce(const LbsSystem& sys, std::span<const Vec2> fixed) {
  const auto n = static_cast<std::size_t>(sys.c1.rows());
  Reduced r;
  r.slot.assign(n, -1);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!sys.constrained[v]) {
      r.slot[v] = static_cast<Eigen::Index>(r.free.size());
      r.free.push_back(v);
    }
  }
  const auto nf = static_cast<Eigen::Index>(r.free.size());
  r.rhs_u = Eigen::VectorXd::Zero(nf);
  r.rhs_v = Eigen::VectorXd::Zero(nf);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(sys.c1.nonZeros()));
  for (Eigen::Index i = 0; i < nf; ++i) {
    for (SparseMatrix::InnerIterator it(sys.c1, r.free[static_cast<std::size_t>(i)]); it; ++it) {
      const auto col = static_cast<std::size_t>(it.col());
      if (r.slot[col] >= 0) {
        triplets.emplace_back(i, r.slot[col], it.value());
      } else {
        r.rhs_u[i] -= it.value() * fixed[col].x;
        r.rhs_v[i] -= it.value() * fixed[col].y;
      }
    }
  }
  r.matrix.resize(nf, nf);
  r.matrix.setFromTriplets(triplets.begin(), triplets.end());
  r.matrix.makeCompressed();
  return r;
}

}  // namespace

DeformationMap solve(const LbsSystem& system, const std::optional<DeformationMap>& guess,
                     const SolveOptions& options, SolveStats* stats) {
  const std::size_t n = system.mesh->vertex_count();
  std::vector<Vec2> pos(system.mesh->vertices().begin(), system.mesh->vertices().end());
  if (guess) {
    if (!(guess->mesh() == *system.mesh)) {
      throw Error(ErrorKind::InvalidArgument, "initial guess belongs to a different mesh");
    }
    std::copy(guess->positions().begin(), guess->positions().end(), pos.begin());
  }
  for (const auto& [v, target] : system.bc.constraints) pos[v] = target;

  const Reduced red = reduce(system, pos);
  const auto nf = static_cast<Eigen::Index>(red.free.size());
  if (nf > 0) {
    using Solver = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                            Eigen::DiagonalPreconditioner<double>>;
    Solver cg;
    cg.setMaxIterations(static_cast<Eigen::Index>(options.iteration_factor) *
                        static_cast<Eigen::Index>(n));
    cg.compute(red.matrix);
    if (cg.info() != Eigen::Success) {
      throw Error(ErrorKind::NumericalFailure, "CG setup failed on the reduced LBS system");
    }

    auto run = [&](const Eigen::VectorXd& rhs, auto coord, long* iters, double* resid) {
      Eigen::VectorXd x0(nf);
      for (Eigen::Index i = 0; i < nf; ++i) x0[i] = coord(pos[red.free[static_cast<std::size_t>(i)]]);
      // Keep the L1 residual of the solved system below 1e-8 per vertex.
      double tol = options.relative_tolerance;
      const double bnorm = rhs.norm();
      if (bnorm > 0.0) {
        const double l1_cap = 0.5e-8 * static_cast<double>(n) /
                              (std::sqrt(static_cast<double>(nf)) * bnorm);
        tol = std::max(std::min(tol, l1_cap), 1e-15);
      }
      cg.setTolerance(tol);
      Eigen::VectorXd x = cg.solveWithGuess(rhs, x0);
      if (cg.info() != Eigen::Success) {
        throw NumericalFailure(cg.error(), "LBS conjugate gradient did not converge after " +
                                               std::to_string(cg.iterations()) +
                                               " iterations, relative residual " +
                                               std::to_string(cg.error()));
      }
      *iters = static_cast<long>(cg.iterations());
      *resid = cg.error();
      return x;
    };

    SolveStats local;
    const Eigen::VectorXd u = run(red.rhs_u, [](Vec2 p) { return p.x; }, &local.iterations_u,
                                  &local.relative_residual_u);
    const Eigen::VectorXd v = run(red.rhs_v, [](Vec2 p) { return p.y; }, &local.iterations_v,
                                  &local.relative_residual_v);
    for (Eigen::Index i = 0; i < nf; ++i) pos[red.free[static_cast<std::size_t>(i)]] = {u[i], v[i]};
    if (stats) *stats = local;
  }
  return DeformationMap(system.mesh, std::move(pos));
}

double residual_loss(const LbsSystem& system, const DeformationMap& map) {
  if (!(map.mesh() == *system.mesh)) {
    throw Error(ErrorKind::InvalidArgument, "map belongs to a different mesh");
  }
  const auto pos = map.positions();
  double total = 0.0;
  for (Eigen::Index row = 0; row < system.c1.rows(); ++row) {
    if (system.constrained[static_cast<std::size_t>(row)]) continue;
    double ru = 0.0;
    for (SparseMatrix::InnerIterator it(system.c1, row); it; ++it) {
      ru += it.value() * pos[static_cast<std::size_t>(it.col())].x;
    }
    double rv = 0.0;
    for (SparseMatrix::InnerIterator it(system.c2, row); it; ++it) {
      rv += it.value() * pos[static_cast<std::size_t>(it.col())].y;
    }
    total += std::abs(ru) + std::abs(rv);
  }
  return total;
}

DeformationMap lbs_reconstruct(const BeltramiField& field, const std::optional<DeformationMap>& guess) {
  const auto& mesh = field.mesh_ptr();
  return solve(assemble(mesh, field, BoundaryCondition::identity_boundary(*mesh)), guess);
}

}  // namespace qcwarp
