#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "idp/assembly.hpp"
#include "idp/kernels.hpp"

using namespace idp;
namespace k = idp::kernels;

namespace {

struct Workload {
  AssembledOperators ops;
  std::vector<double> viscosity, state, flux;
};

Workload make_workload(int dim, int m, std::uint64_t seed) {
  Workload w;
  w.ops = dim == 1 ? assemble(build_interval_mesh(37, 0.0, 1.0, seed % 2 == 0))
                   : assemble(build_triangle_mesh(9, 7, {}, 0.25, seed));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = w.ops.num_nodes();
  w.viscosity.resize(w.ops.stencils.num_entries());
  for (auto& d : w.viscosity) d = std::abs(dist(rng));
  w.state.resize(static_cast<std::size_t>(n) * m);
  for (auto& u : w.state) u = dist(rng);
  w.flux.resize(static_cast<std::size_t>(n) * dim * m);
  for (auto& f : w.flux) f = dist(rng);
  return w;
}

std::vector<double> run_update(const k::KernelTable& table, const Workload& w, int dim, int m) {
  std::vector<double> out(w.state.size(), 0.0);
  k::GraphUpdateArgs a;
  a.num_rows = w.ops.num_nodes();
  a.components = m;
  a.dim = dim;
  a.row_ptr = w.ops.stencils.row_ptr.data();
  a.cols = w.ops.stencils.cols.data();
  a.viscosity = w.viscosity.data();
  a.cx = w.ops.cx.data();
  a.cy = w.ops.cy.data();
  a.mass = w.ops.mass.data();
  a.state = w.state.data();
  a.flux = w.flux.data();
  a.dt = 1e-3;
  a.out = out.data();
  table.graph_update(a);
  return out;
}

// out_i = U_i + dt/m_i sum_j [d_ij (U_j - U_i) - (F_j - F_i) . c_ij], written out directly.
std::vector<double> reference_update(const Workload& w, int dim, int m) {
  const auto& s = w.ops.stencils;
  std::vector<double> out(w.state.size());
  for (int i = 0; i < s.num_rows(); ++i) {
    for (int c = 0; c < m; ++c) {
      double acc = 0.0;
      for (int e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
        const int j = s.cols[e];
        acc += w.viscosity[e] * (w.state[j * m + c] - w.state[i * m + c]);
        for (int l = 0; l < dim; ++l) {
          const double cl = l == 0 ? w.ops.cx[e] : w.ops.cy[e];
          acc -= (w.flux[(j * dim + l) * m + c] - w.flux[(i * dim + l) * m + c]) * cl;
        }
      }
      out[i * m + c] = w.state[i * m + c] + 1e-3 / w.ops.mass[i] * acc;
    }
  }
  return out;
}

std::vector<k::Isa> isas() {
  std::vector<k::Isa> out{k::Isa::scalar};
  if (k::available(k::Isa::avx2)) out.push_back(k::Isa::avx2);
  return out;
}

}  // namespace

TEST_CASE("kernel tables report their ISA") {
  CHECK(k::scalar_table().isa == k::Isa::scalar);
  CHECK(k::available(k::Isa::scalar));
  CHECK(k::to_string(k::Isa::scalar) == "scalar");
  CHECK(k::to_string(k::Isa::avx2) == "avx2");
  for (const auto isa : isas()) CHECK(k::table(isa).isa == isa);
  if (!k::available(k::Isa::avx2)) {
    MESSAGE("AVX2 kernels unavailable on this machine; only the scalar path is exercised");
    CHECK_THROWS(k::table(k::Isa::avx2));
  }
}

TEST_CASE("select switches the active table") {
  const k::Isa before = k::active().isa;
  for (const auto isa : isas()) {
    k::select(isa);
    CHECK(k::active().isa == isa);
  }
  k::select(before);
}

TEST_CASE("graph update matches the direct formula") {
  for (const int dim : {1, 2}) {
    for (const int m : {1, 2, 3, 4}) {
      const auto w = make_workload(dim, m, 100 + dim * 10 + m);
      const auto expected = reference_update(w, dim, m);
      for (const auto isa : isas()) {
        const auto got = run_update(k::table(isa), w, dim, m);
        for (std::size_t q = 0; q < got.size(); ++q) CHECK(std::abs(got[q] - expected[q]) <= 1e-13);
      }
    }
  }
}

TEST_CASE("SIMD graph update is equivalent to scalar") {
  if (!k::available(k::Isa::avx2)) return;
  for (const int dim : {1, 2}) {
    for (const int m : {1, 2, 3, 4}) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto w = make_workload(dim, m, seed);
        const auto a = run_update(k::scalar_table(), w, dim, m);
        const auto b = run_update(k::table(k::Isa::avx2), w, dim, m);
        if (m > 1) {
          // One lane per component: the same operations in the same order.
          CHECK(a == b);
        } else {
          for (std::size_t q = 0; q < a.size(); ++q) CHECK(std::abs(a[q] - b[q]) <= 1e-14 * (1.0 + std::abs(a[q])));
        }
      }
    }
  }
}

TEST_CASE("linear combination, weighted sums and cfl bound agree across ISAs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u}) {
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = dist(rng);
    for (auto& v : y) v = dist(rng);
    std::vector<double> expected(n);
    for (std::size_t q = 0; q < n; ++q) expected[q] = 0.75 * x[q] + 0.25 * y[q];
    for (const auto isa : isas()) {
      std::vector<double> out(n);
      k::table(isa).linear_combination(out, 0.75, x, 0.25, y);
      CHECK(out == expected);
      std::vector<double> alias = x;
      k::table(isa).linear_combination(alias, 0.75, alias, 0.25, y);
      CHECK(alias == expected);
    }

    std::vector<double> weights(n);
    for (auto& v : weights) v = std::abs(dist(rng)) + 0.1;
    for (const int m : {1, 2, 3, 4}) {
      std::vector<double> values(n * m);
      for (auto& v : values) v = dist(rng);
      std::vector<double> ref(m, 0.0);
      k::scalar_table().weighted_sums(weights, values, m, ref);
      for (const auto isa : isas()) {
        std::vector<double> sums(m, 0.0);
        k::table(isa).weighted_sums(weights, values, m, sums);
        CHECK(sums == ref);
      }
    }

    std::vector<double> diagonal(n);
    for (auto& v : diagonal) v = -std::abs(dist(rng));
    if (n > 2) diagonal[1] = 0.0;
    const double ref_bound = k::scalar_table().cfl_bound(weights, diagonal);
    for (const auto isa : isas()) CHECK(k::table(isa).cfl_bound(weights, diagonal) == ref_bound);
  }
}

TEST_CASE("cfl bound skips vanishing diagonals") {
  const std::vector<double> mass{1.0, 2.0, 3.0}, zero{0.0, 0.0, 0.0}, diag{-1.0, 0.0, -0.5};
  for (const auto isa : isas()) {
    CHECK(std::isinf(k::table(isa).cfl_bound(mass, zero)));
    CHECK(k::table(isa).cfl_bound(mass, diag) == 0.5);
  }
}
