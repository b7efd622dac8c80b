#pragma once

#include <span>
#include <string_view>

namespace idp::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Inputs of the sparse forward-Euler update
///
///   out_i = U_i + dt/m_i * sum_{j in I(S_i)} [ d_ij (U_j - U_i) - (F_j - F_i) . c_ij ].
///
/// `state` is node-major (N x m), `flux` is node-major then direction then
/// component (N x d x m). Entries (i, i) contribute zero and need no skipping.
struct GraphUpdateArgs {
  int num_rows = 0;
  int components = 1;
  int dim = 1;
  const int* row_ptr = nullptr;
  const int* cols = nullptr;
  const double* viscosity = nullptr;  // per CSR entry
  const double* cx = nullptr;         // per CSR entry
  const double* cy = nullptr;         // per CSR entry, unused when dim == 1
  const double* mass = nullptr;
  const double* state = nullptr;
  const double* flux = nullptr;
  double dt = 0.0;
  double* out = nullptr;
};

struct KernelTable {
  Isa isa;
  void (*graph_update)(const GraphUpdateArgs& args);
  /// out = a x + b y, elementwise. `out` may alias x or y.
  void (*linear_combination)(std::span<double> out, double a, std::span<const double> x, double b,
                             std::span<const double> y);
  /// sums[k] = sum_i w_i values[i m + k], accumulated in ascending node order.
  void (*weighted_sums)(std::span<const double> weights, std::span<const double> values, int components,
                        std::span<double> sums);
  /// min_i m_i / (2 |d_ii|) over nodes with d_ii != 0; +infinity if there are none.
  double (*cfl_bound)(std::span<const double> mass, std::span<const double> diagonal);
};

const KernelTable& scalar_table();
bool available(Isa isa);
const KernelTable& table(Isa isa);

/// Kernels in use. Defaults to the widest available ISA; the environment
/// variable IDP_KERNELS=scalar|avx2 overrides the choice.
const KernelTable& active();
void select(Isa isa);

namespace detail {
const KernelTable* avx2_table();  // nullptr when not compiled in
}

}  // namespace idp::kernels
