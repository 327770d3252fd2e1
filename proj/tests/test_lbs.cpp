#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>

#include "doctest.h"
#include "qcwarp/error.hpp"
#include "qcwarp/lbs.hpp"
#include "support.hpp"

using namespace qcwarp;
using namespace qcwarp::testing;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

// Free-free block of the stiffness matrix.
SparseMatrix reduced_block(const LbsSystem& sys) {
  std::vector<Eigen::Index> slot(sys.constrained.size(), -1);
  Eigen::Index nf = 0;
  for (std::size_t v = 0; v < slot.size(); ++v)
    if (!sys.constrained[v]) slot[v] = nf++;
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index r = 0; r < sys.c1.rows(); ++r) {
    if (slot[static_cast<std::size_t>(r)] < 0) continue;
    for (SparseMatrix::InnerIterator it(sys.c1, r); it; ++it)
      if (slot[static_cast<std::size_t>(it.col())] >= 0)
        t.emplace_back(slot[static_cast<std::size_t>(r)], slot[static_cast<std::size_t>(it.col())], it.value());
  }
  SparseMatrix m(nf, nf);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

TEST_CASE("alpha coefficients") {
  auto check = [](Complex mu, double a1, double a2, double a3) {
    const auto a = alpha_coefficients(mu);
    CHECK(a.a1 == doctest::Approx(a1).epsilon(1e-14));
    CHECK(a.a2 == doctest::Approx(a2).epsilon(1e-14));
    CHECK(a.a3 == doctest::Approx(a3).epsilon(1e-14));
  };
  check(0.0, 1.0, 0.0, 1.0);
  check({0.5, 0.0}, 1.0 / 3.0, 0.0, 3.0);
  check({0.0, 0.5}, 5.0 / 3.0, -4.0 / 3.0, 5.0 / 3.0);

  CHECK(kind_of([] { alpha_coefficients({1.0, 0.0}); }) == ErrorKind::InadmissibleCoefficient);
  CHECK(kind_of([] { alpha_coefficients({0.8, 0.7}); }) == ErrorKind::InadmissibleCoefficient);

  // A is symmetric positive definite with det 1 for every admissible mu
  const CounterRng rng(1, 2);
  for (int t = 0; t < 1000; ++t) {
    const Complex mu = std::polar(0.999 * rng.uniform(2 * t), 6.283185307179586 * rng.uniform(2 * t + 1));
    const auto a = alpha_coefficients(mu);
    CHECK(a.a1 > 0.0);
    CHECK(a.a1 * a.a3 - a.a2 * a.a2 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("zero field on a 3x3 grid gives the hand-assembled Laplacian") {
  // Right isosceles triangles: legs carry -1/2 per adjacent triangle, the
  // SW-NE diagonals carry 0. Vertex index = 3 * row + col.
  const double expected[9][9] = {
      {1.0, -0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0},
      {-0.5, 2.0, -0.5, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0},
      {0.0, -0.5, 1.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0},
      {-0.5, 0.0, 0.0, 2.0, -1.0, 0.0, -0.5, 0.0, 0.0},
      {0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0},
      {0.0, 0.0, -0.5, 0.0, -1.0, 2.0, 0.0, 0.0, -0.5},
      {0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 1.0, -0.5, 0.0},
      {0.0, 0.0, 0.0, 0.0, -1.0, 0.0, -0.5, 2.0, -0.5},
      {0.0, 0.0, 0.0, 0.0, 0.0, -0.5, 0.0, -0.5, 1.0},
  };
  const auto mesh = build_grid_mesh(3, 3);
  const auto sys = assemble(mesh, BeltramiField(mesh), BoundaryCondition::identity_boundary(*mesh));
  const Eigen::MatrixXd c1(sys.c1);
  const Eigen::MatrixXd c2(sys.c2);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      CHECK(c1(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
      CHECK(c2(i, j) == c1(i, j));
    }
  }
}

TEST_CASE("assembled matrices are symmetric with constants in the kernel") {
  const auto mesh = build_grid_mesh(17, 13);
  const auto mu = smooth_random_field(mesh, 4, 0.9, 3.0);
  const auto sys = assemble(mesh, mu, BoundaryCondition::identity_boundary(*mesh));
  CHECK(sys.c1.rows() == static_cast<Eigen::Index>(mesh->vertex_count()));
  CHECK(sys.c1.cols() == static_cast<Eigen::Index>(mesh->vertex_count()));
  const Eigen::MatrixXd c(sys.c1);
  const double scale = c.cwiseAbs().maxCoeff();
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  for (Eigen::Index r = 0; r < c.rows(); ++r) CHECK(std::abs(c.row(r).sum()) <= 1e-9);
}

TEST_CASE("reduced systems are positive definite for admissible fields") {
  const auto mesh = build_grid_mesh(12, 12);
  for (double sup : {0.0, 0.5, 0.95, 0.999}) {
    const auto mu = smooth_random_field(mesh, 8, std::max(sup, 1e-9), 2.0);
    const auto sys = assemble(mesh, mu, BoundaryCondition::identity_boundary(*mesh));
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Eigen::SparseMatrix<double>(reduced_block(sys)));
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("boundary conditions") {
  const auto mesh = build_grid_mesh(6, 4);
  const auto bc = BoundaryCondition::identity_boundary(*mesh);
  CHECK(bc.kind == BoundaryCondition::Kind::IdentityBoundary);
  CHECK(bc.constraints.size() == mesh->boundary_vertices().size());
  for (const auto& [v, p] : bc.constraints) {
    CHECK(mesh->is_boundary(v));
    CHECK(p == mesh->vertices()[v]);
  }
  const auto sys = assemble(mesh, BeltramiField(mesh), bc);
  for (std::size_t v = 0; v < mesh->vertex_count(); ++v) CHECK(sys.constrained[v] == mesh->is_boundary(static_cast<std::uint32_t>(v)));
}

TEST_CASE("assembly errors") {
  const auto mesh = build_grid_mesh(5, 5);
  const BeltramiField zero(mesh);
  CHECK(kind_of([&] { assemble(mesh, zero, BoundaryCondition::landmarks({})); }) == ErrorKind::UnderdeterminedSystem);
  CHECK(kind_of([&] { assemble(mesh, zero, BoundaryCondition::landmarks({{3, {}}, {3, {}}})); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { assemble(mesh, zero, BoundaryCondition::landmarks({{25, {}}})); }) == ErrorKind::InvalidArgument);

  BeltramiField hot(mesh);
  hot.values()[5] = {0.0, 1.0 - 1e-7};
  CHECK(kind_of([&] { assemble(mesh, hot, BoundaryCondition::identity_boundary(*mesh)); }) == ErrorKind::InadmissibleCoefficient);
  hot.values()[5] = {0.0, 1.0 - 2e-6};
  CHECK_NOTHROW(assemble(mesh, hot, BoundaryCondition::identity_boundary(*mesh)));

  const auto other = build_grid_mesh(4, 5);
  CHECK(kind_of([&] { assemble(other, zero, BoundaryCondition::identity_boundary(*other)); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("zero field with identity boundary solves to the identity") {
  for (int w : {3, 17, 65}) {
    const auto mesh = build_grid_mesh(w, w);
    const auto sys = assemble(mesh, BeltramiField(mesh), BoundaryCondition::identity_boundary(*mesh));
    const auto f = solve(sys);
    CHECK(max_vertex_error(f, identity_map(mesh)) <= 1e-8);
    CHECK(residual_loss(sys, f) <= 1e-8 * static_cast<double>(mesh->vertex_count()));
    CHECK(residual_loss(sys, identity_map(mesh)) <= 1e-10);
  }
}

TEST_CASE("constant coefficient with affine boundary recovers the affine map") {
  // f(x, y) = (2x, y) has mu = 1/3
  const auto mesh = build_grid_mesh(33, 25);
  const auto truth = mapped(mesh, [](Vec2 p) { return Vec2{2 * p.x, p.y}; });
  const BeltramiField mu(mesh, std::vector<Complex>(mesh->face_count(), Complex{1.0 / 3.0, 0.0}));
  const auto sys = assemble(mesh, mu, BoundaryCondition::boundary_of(truth));
  const auto f = solve(sys);
  CHECK(max_vertex_error(f, truth) <= 1e-6);
  for (const auto& [v, p] : sys.bc.constraints) CHECK(f.positions()[v] == p);
}

TEST_CASE("round trip through the coefficient with the map's own boundary") {
  const auto mesh = build_grid_mesh(33, 33);
  const auto g = mapped(mesh, [](Vec2 p) {
    return Vec2{p.x + 1.5 * std::sin(0.2 * p.y) + 0.01 * p.x * p.y, p.y + 1.2 * std::sin(0.15 * p.x + 0.1 * p.y)};
  });
  REQUIRE(face_orientation_count(g).flipped == 0);
  const auto f = solve(assemble(mesh, compute_beltrami(g), BoundaryCondition::boundary_of(g)));
  CHECK(max_vertex_error(f, g) <= 1e-2);
}

TEST_CASE("perturbing the solution increases the residual") {
  const auto mesh = build_grid_mesh(33, 33);
  const auto mu = smooth_random_field(mesh, 12, 0.6, 4.0);
  const auto sys = assemble(mesh, mu, BoundaryCondition::identity_boundary(*mesh));
  const auto f = solve(sys);
  auto noisy = f;
  const CounterRng rng(12, 3);
  for (std::size_t v = 0; v < noisy.positions().size(); ++v) {
    if (mesh->is_boundary(static_cast<std::uint32_t>(v))) continue;
    noisy.positions()[v] = noisy.positions()[v] + 0.1 * Vec2{rng.normal(2 * v), rng.normal(2 * v + 1)};
  }
  CHECK(residual_loss(sys, noisy) > residual_loss(sys, f));
  CHECK(residual_loss(sys, f) <= 1e-8 * static_cast<double>(mesh->vertex_count()));
}

TEST_CASE("solution is linear in the boundary data") {
  const auto mesh = build_grid_mesh(25, 21);
  const auto mu = smooth_random_field(mesh, 5, 0.7, 3.0);
  const auto g = mapped(mesh, [](Vec2 p) { return Vec2{p.x + 0.1 * p.y + 2.0, 1.1 * p.y - 3.0}; });
  const auto base = solve(assemble(mesh, mu, BoundaryCondition::boundary_of(g)));
  for (double s : {0.5, 3.0, -2.0}) {
    auto bc = BoundaryCondition::boundary_of(g);
    for (auto& c : bc.constraints) c.second = s * c.second;
    const auto scaled = solve(assemble(mesh, mu, bc));
    for (std::size_t v = 0; v < base.positions().size(); ++v) {
      const Vec2 d = scaled.positions()[v] - s * base.positions()[v];
      CHECK(std::hypot(d.x, d.y) <= 1e-7 * std::abs(s) * 30.0);
    }
  }
}

TEST_CASE("identity boundary keeps vertices inside the domain for moderate fields") {
  const auto mesh = build_grid_mesh(65, 65);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = lbs_reconstruct(smooth_random_field(mesh, seed, 0.7));
    for (const Vec2 p : f.positions()) {
      CHECK(p.x >= -1e-6);
      CHECK(p.x <= 64 + 1e-6);
      CHECK(p.y >= -1e-6);
      CHECK(p.y <= 64 + 1e-6);
    }
  }
}

TEST_CASE("warm start reaches the same solution") {
  const auto mesh = build_grid_mesh(33, 33);
  const auto mu = smooth_random_field(mesh, 21, 0.8, 4.0);
  const auto sys = assemble(mesh, mu, BoundaryCondition::identity_boundary(*mesh));
  SolveStats cold_stats, warm_stats;
  const auto cold = solve(sys, std::nullopt, {}, &cold_stats);
  const auto warm = solve(sys, cold, {}, &warm_stats);
  CHECK(max_vertex_error(cold, warm) <= 1e-8);
  CHECK(warm_stats.iterations_u < cold_stats.iterations_u);
  CHECK(cold_stats.relative_residual_u <= 1e-10);
  CHECK(cold_stats.relative_residual_v <= 1e-10);
}

TEST_CASE("iteration cap raises numerical failure") {
  const auto mesh = build_grid_mesh(17, 17);
  const auto sys = assemble(mesh, smooth_random_field(mesh, 2, 0.5, 3.0), BoundaryCondition::identity_boundary(*mesh));
  SolveOptions opts;
  opts.iteration_factor = 0;
  try {
    solve(sys, std::nullopt, opts);
    FAIL("expected numerical-failure");
  } catch (const NumericalFailure& e) {
    CHECK(e.kind() == ErrorKind::NumericalFailure);
    CHECK(e.residual() > 1e-10);
  }
}
