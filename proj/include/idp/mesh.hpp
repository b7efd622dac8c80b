#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "idp/types.hpp"

namespace idp {

/// P1 Lagrange mesh made of 1D segments or 2D triangles.
///
/// Cells are stored as vertex triples; segments only use the first two
/// entries. Triangles are kept counter-clockwise. In a periodic 1D mesh the
/// last cell wraps around to node 0 and `period` holds the domain length.
struct Mesh {
  int dim = 1;
  std::vector<Vec> nodes;
  std::vector<std::array<int, 3>> cells;
  bool periodic = false;
  double period = 0.0;
  std::vector<std::uint8_t> boundary;  // per node, 1 on the domain boundary
  std::vector<double> measures;        // per cell, |K| > 0

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int vertices_per_cell() const { return dim + 1; }

  /// Gradients of the local shape functions on cell k, in vertex order.
  std::array<Vec, 3> shape_gradients(int k) const;

  /// Measure of the bounding domain: period, interval length or box area.
  double domain_measure() const;
};

/// Recomputes orientation, measures and boundary flags, then checks the mesh
/// invariants. Throws idp::Error on index, measure or coverage violations.
void finalize_mesh(Mesh& mesh);

Mesh build_interval_mesh(int n_cells, double x_min, double x_max, bool periodic);

struct Rectangle {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

/// Structured nx-by-ny rectangle split into 2 nx ny triangles along the
/// south-west/north-east diagonals. Interior nodes are jittered by at most
/// `perturbation` times the local spacing in each coordinate.
Mesh build_triangle_mesh(int nx, int ny, const Rectangle& box, double perturbation,
                         std::uint64_t seed);

/// Node-to-node adjacency of the P1 space in CSR form.
///
/// Row i lists I(S_i) in ascending order (i included). For each entry
/// (i, j) the shared cells S_ij are listed in `cells_of_entry`.
struct Stencils {
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<int> diag;       // entry index of (i, i)
  std::vector<int> transpose;  // entry index of (j, i) for entry (i, j)
  std::vector<int> entry_cell_ptr;
  std::vector<int> entry_cells;

  int num_rows() const { return static_cast<int>(row_ptr.size()) - 1; }
  int num_entries() const { return static_cast<int>(cols.size()); }
  /// Entry index of (i, j), or -1 when j is not in I(S_i).
  int find(int i, int j) const;
};

Stencils node_stencils(const Mesh& mesh);

/// Text format: `dim N M periodic`, N coordinate lines, M vertex-index lines.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

}  // namespace idp
