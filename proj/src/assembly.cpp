#include "idp/assembly.hpp"

#include <algorithm>
#include <limits>

namespace idp {

std::vector<double> assemble_lumped_mass(const Mesh& mesh) {
  std::vector<double> mass(mesh.num_nodes(), 0.0);
  const int nv = mesh.vertices_per_cell();
  // Exact P1 integral of a hat function over a simplex: |K| / (d + 1).
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double share = mesh.measures[k] / nv;
    for (int a = 0; a < nv; ++a) mass[mesh.cells[k][a]] += share;
  }
  return mass;
}

void assemble_cij(const Mesh& mesh, const Stencils& stencils, std::vector<double>& cx,
                  std::vector<double>& cy) {
  cx.assign(stencils.num_entries(), 0.0);
  cy.assign(stencils.num_entries(), 0.0);
  const int nv = mesh.vertices_per_cell();
  // grad phi_j is constant on K and int_K phi_i = |K| / (d + 1). Cells are
  // visited in ascending order so the accumulation order is fixed.
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto grads = mesh.shape_gradients(k);
    const double share = mesh.measures[k] / nv;
    const auto& c = mesh.cells[k];
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        const int e = stencils.find(c[a], c[b]);
        cx[e] += share * grads[b][0];
        cy[e] += share * grads[b][1];
      }
    }
  }
}

std::vector<CellForm> assemble_bk(const Mesh& mesh) {
  std::vector<CellForm> forms(mesh.num_cells());
  const double theta = 1.0 / (mesh.vertices_per_cell() - 1);
  for (int k = 0; k < mesh.num_cells(); ++k) forms[k] = {mesh.measures[k], theta};
  return forms;
}

MeshMetrics mesh_metrics(const Mesh& mesh, const Stencils& stencils) {
  const int nv = mesh.vertices_per_cell();
  std::vector<std::array<Vec, 3>> grads(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) grads[k] = mesh.shape_gradients(k);

  auto local_index = [&](int k, int node) {
    for (int a = 0; a < nv; ++a) {
      if (mesh.cells[k][a] == node) return a;
    }
    return -1;
  };

  MeshMetrics metrics;
  metrics.h_min = std::numeric_limits<double>::infinity();
  metrics.mu_min = std::numeric_limits<double>::infinity();
  metrics.mu_max = 0.0;
  metrics.theta_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cells[k];
    double max_grad = 0.0;
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        if (a == b) continue;
        // ||grad phi_i|| in L^inf(S_ij): maximum over every cell shared by i and j.
        const int e = stencils.find(c[a], c[b]);
        for (int p = stencils.entry_cell_ptr[e]; p < stencils.entry_cell_ptr[e + 1]; ++p) {
          const int t = stencils.entry_cells[p];
          max_grad = std::max(max_grad, norm(grads[t][local_index(t, c[a])]));
        }
      }
    }
    metrics.h_min = std::min(metrics.h_min, 1.0 / max_grad);
    const double mu = (mesh.measures[k] / nv) / mesh.measures[k];
    metrics.mu_min = std::min(metrics.mu_min, mu);
    metrics.mu_max = std::max(metrics.mu_max, mu);
    metrics.theta_min = std::min(metrics.theta_min, 1.0 / (nv - 1));
  }
  return metrics;
}

double AssembledOperators::shared_form_weight(int entry) const {
  double sum = 0.0;
  for (int p = stencils.entry_cell_ptr[entry]; p < stencils.entry_cell_ptr[entry + 1]; ++p) {
    const auto& form = cell_forms[stencils.entry_cells[p]];
    sum += form.theta * form.measure;
  }
  return sum;
}

AssembledOperators assemble(const Mesh& mesh) {
  AssembledOperators ops;
  ops.dim = mesh.dim;
  ops.stencils = node_stencils(mesh);
  ops.mass = assemble_lumped_mass(mesh);
  assemble_cij(mesh, ops.stencils, ops.cx, ops.cy);
  ops.c_norm.resize(ops.cx.size());
  for (std::size_t e = 0; e < ops.cx.size(); ++e) ops.c_norm[e] = std::hypot(ops.cx[e], ops.cy[e]);
  ops.column_sums.assign(mesh.num_nodes(), Vec{0.0, 0.0});
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    for (int e = ops.stencils.row_ptr[i]; e < ops.stencils.row_ptr[i + 1]; ++e) {
      const int j = ops.stencils.cols[e];
      ops.column_sums[j][0] += ops.cx[e];
      ops.column_sums[j][1] += ops.cy[e];
    }
  }
  ops.cell_forms = assemble_bk(mesh);
  ops.cells = mesh.cells;
  ops.metrics = mesh_metrics(mesh, ops.stencils);
  return ops;
}

}  // namespace idp
