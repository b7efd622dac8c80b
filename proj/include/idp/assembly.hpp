#pragma once

#include <vector>

#include "idp/mesh.hpp"

namespace idp {

struct MeshMetrics {
  double h_min = 0.0;
  double mu_min = 0.0;
  double mu_max = 0.0;
  double theta_min = 0.0;
};

/// Per-cell graph-Laplacian form: |K| on the diagonal, -theta_K |K| off it.
struct CellForm {
  double measure = 0.0;
  double theta = 0.0;
  double operator()(int a, int b) const { return a == b ? measure : -theta * measure; }
};

/// Discrete operators of the P1 scheme on one mesh.
///
/// `c` holds the d-vectors c_ij = int phi_i grad phi_j, stored per CSR entry
/// of `stencils` in structure-of-arrays form (`cx`, `cy`). `column_sums` is
/// sum_i c_ij, which is nonzero only on boundary nodes and gives the boundary
/// flux of the discrete conservation balance.
struct AssembledOperators {
  int dim = 1;
  Stencils stencils;
  std::vector<double> mass;
  std::vector<double> cx, cy;
  std::vector<double> c_norm;
  std::vector<Vec> column_sums;
  std::vector<CellForm> cell_forms;
  std::vector<std::array<int, 3>> cells;
  MeshMetrics metrics;

  int num_nodes() const { return static_cast<int>(mass.size()); }
  Vec c(int entry) const { return {cx[entry], cy[entry]}; }
  /// Sum over T in S_ij of -b_T(phi_j, phi_i) for the CSR entry (i, j), i != j.
  double shared_form_weight(int entry) const;
};

std::vector<double> assemble_lumped_mass(const Mesh& mesh);

/// c_ij for every stencil entry, as (cx, cy) arrays aligned with `stencils`.
void assemble_cij(const Mesh& mesh, const Stencils& stencils, std::vector<double>& cx,
                  std::vector<double>& cy);

std::vector<CellForm> assemble_bk(const Mesh& mesh);

MeshMetrics mesh_metrics(const Mesh& mesh, const Stencils& stencils);

AssembledOperators assemble(const Mesh& mesh);

}  // namespace idp
