#include <doctest.h>

#include <cmath>

#include "idp/assembly.hpp"

using namespace idp;

namespace {

Mesh random_mesh(std::uint64_t seed) {
  return build_triangle_mesh(5 + static_cast<int>(seed % 4), 4 + static_cast<int>(seed % 3), {-1.0, 1.0, 0.0, 3.0},
                             0.28, seed);
}

}  // namespace

TEST_CASE("lumped mass of a periodic uniform mesh") {
  const auto mass = assemble_lumped_mass(build_interval_mesh(10, 0.0, 1.0, true));
  for (double m : mass) CHECK(m == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("lumped mass is the share of the incident cells") {
  const Mesh m = random_mesh(3);
  const auto mass = assemble_lumped_mass(m);
  std::vector<double> expected(m.num_nodes(), 0.0);
  for (int k = 0; k < m.num_cells(); ++k) {
    for (int a = 0; a < 3; ++a) expected[m.cells[k][a]] += m.measures[k] / 3.0;
  }
  double total = 0.0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    CHECK(mass[i] > 0.0);
    CHECK(mass[i] == doctest::Approx(expected[i]).epsilon(1e-14));
    total += mass[i];
  }
  CHECK(std::abs(total - 6.0) <= 1e-12 * 6.0);
}

TEST_CASE("lumping equals the row sums of the consistent mass matrix") {
  const Mesh m = random_mesh(5);
  const auto mass = assemble_lumped_mass(m);
  // Exact P1 simplex mass matrix: |K| (1 + delta_ab) / ((d + 1)(d + 2)).
  std::vector<double> rows(m.num_nodes(), 0.0);
  for (int k = 0; k < m.num_cells(); ++k) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) rows[m.cells[k][a]] += m.measures[k] * (a == b ? 2.0 : 1.0) / 12.0;
    }
  }
  for (int i = 0; i < m.num_nodes(); ++i) CHECK(std::abs(rows[i] - mass[i]) <= 1e-12 * mass[i]);
}

TEST_CASE("c_ij of a uniform 1D mesh") {
  const Mesh m = build_interval_mesh(8, 0.0, 2.0, false);
  const auto ops = assemble(m);
  const auto& s = ops.stencils;
  for (int i = 1; i < 8; ++i) {
    CHECK(ops.cx[s.find(i, i + 1)] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ops.cx[s.find(i, i - 1)] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::abs(ops.cx[s.diag[i]]) <= 1e-14);
  }
  // End points: c_00 = -1/2 and c_NN = +1/2, the boundary terms.
  CHECK(ops.cx[s.diag[0]] == doctest::Approx(-0.5));
  CHECK(ops.cx[s.diag[8]] == doctest::Approx(0.5));
  CHECK(ops.column_sums[0][0] == doctest::Approx(-1.0));
  CHECK(ops.column_sums[8][0] == doctest::Approx(1.0));
  CHECK(std::abs(ops.column_sums[4][0]) <= 1e-14);
}

TEST_CASE("c_ij rows sum to zero and are antisymmetric off the boundary") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Mesh m = random_mesh(seed);
    const auto ops = assemble(m);
    const auto& s = ops.stencils;
    for (int i = 0; i < s.num_rows(); ++i) {
      Vec sum{0.0, 0.0};
      for (int e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
        sum[0] += ops.cx[e];
        sum[1] += ops.cy[e];
        const int j = s.cols[e];
        if (!m.boundary[i] || !m.boundary[j]) {
          CHECK(std::abs(ops.cx[e] + ops.cx[s.transpose[e]]) <= 1e-14);
          CHECK(std::abs(ops.cy[e] + ops.cy[s.transpose[e]]) <= 1e-14);
        }
      }
      CHECK(std::abs(sum[0]) <= 1e-14);
      CHECK(std::abs(sum[1]) <= 1e-14);
    }
  }
}

TEST_CASE("b_K of triangles and segments") {
  Mesh t;
  t.dim = 2;
  t.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  t.cells = {{0, 1, 2}, {1, 3, 2}};
  finalize_mesh(t);
  const auto forms = assemble_bk(t);
  CHECK(forms[0](0, 0) == doctest::Approx(0.5));
  CHECK(forms[0](0, 1) == doctest::Approx(-0.25));

  const auto seg = assemble_bk(build_interval_mesh(4, 0.0, 1.0, false));
  CHECK(seg[0](0, 0) == doctest::Approx(0.25));
  CHECK(seg[0](1, 0) == doctest::Approx(-0.25));

  for (const auto& f : assemble_bk(random_mesh(2))) {
    for (int a = 0; a < 3; ++a) {
      double sum = 0.0;
      for (int b = 0; b < 3; ++b) {
        sum += f(a, b);
        CHECK(f(a, b) == f(b, a));
      }
      CHECK(std::abs(sum) <= 1e-15);
    }
  }
}

TEST_CASE("b_K is positive semidefinite with the constants as kernel") {
  const CellForm f{0.3, 0.5};
  const auto quad = [&](const std::array<double, 3>& u) {
    double q = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) q += f(a, b) * u[a] * u[b];
    }
    return q;
  };
  CHECK(std::abs(quad({2.0, 2.0, 2.0})) <= 1e-14);
  CHECK(quad({1.0, 0.0, 0.0}) > 0.0);
  CHECK(quad({1.0, -3.0, 0.5}) > 0.0);
}

TEST_CASE("mesh metrics") {
  const Mesh line = build_interval_mesh(10, 0.0, 1.0, false);
  const auto metrics = mesh_metrics(line, node_stencils(line));
  CHECK(metrics.h_min == doctest::Approx(0.1));
  CHECK(metrics.mu_min == 0.5);
  CHECK(metrics.mu_max == 0.5);
  CHECK(metrics.theta_min == 1.0);

  const Mesh tri = random_mesh(4);
  const auto tm = mesh_metrics(tri, node_stencils(tri));
  CHECK(tm.mu_min == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(tm.mu_max == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(tm.theta_min == 0.5);

  Mesh half = tri;
  for (auto& x : half.nodes) x = 0.5 * x;
  finalize_mesh(half);
  CHECK(mesh_metrics(half, node_stencils(half)).h_min == doctest::Approx(0.5 * tm.h_min).epsilon(1e-13));
}

TEST_CASE("|c_ij| is bounded by mu_max |S_ij| / h_min") {
  const Mesh m = random_mesh(6);
  const auto ops = assemble(m);
  const auto& s = ops.stencils;
  for (int e = 0; e < s.num_entries(); ++e) {
    double shared = 0.0;
    for (int p = s.entry_cell_ptr[e]; p < s.entry_cell_ptr[e + 1]; ++p) shared += m.measures[s.entry_cells[p]];
    CHECK(ops.c_norm[e] <= ops.metrics.mu_max * shared / ops.metrics.h_min * (1.0 + 1e-12));
  }
}

TEST_CASE("shared form weight sums theta |T| over the cells of the pair") {
  const Mesh m = build_interval_mesh(4, 0.0, 1.0, false);
  const auto ops = assemble(m);
  CHECK(ops.shared_form_weight(ops.stencils.find(1, 2)) == doctest::Approx(0.25));
  const Mesh t = build_triangle_mesh(2, 2, {}, 0.0, 0);
  const auto tops = assemble(t);
  CHECK(tops.shared_form_weight(tops.stencils.find(4, 1)) == doctest::Approx(2.0 * 0.5 / 8.0));
}
