#include "idp/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "idp/format.hpp"

namespace idp {

namespace {

double signed_area(const Vec& a, const Vec& b, const Vec& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

// Uniform in [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementation so coordinates are reproducible.
double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

std::array<Vec, 3> Mesh::shape_gradients(int k) const {
  const auto& c = cells[k];
  std::array<Vec, 3> g{};
  if (dim == 1) {
    const double len = measures[k];
    g[0] = {-1.0 / len, 0.0};
    g[1] = {1.0 / len, 0.0};
    return g;
  }
  const Vec& a = nodes[c[0]];
  const Vec& b = nodes[c[1]];
  const Vec& d = nodes[c[2]];
  const double twice = 2.0 * measures[k];
  // grad phi_a is the inward normal of the opposite edge scaled by 1/(2|K|).
  g[0] = {(b[1] - d[1]) / twice, (d[0] - b[0]) / twice};
  g[1] = {(d[1] - a[1]) / twice, (a[0] - d[0]) / twice};
  g[2] = {(a[1] - b[1]) / twice, (b[0] - a[0]) / twice};
  return g;
}

double Mesh::domain_measure() const {
  if (dim == 1 && periodic) return period;
  Vec lo = nodes.front(), hi = nodes.front();
  for (const auto& x : nodes) {
    for (int l = 0; l < dim; ++l) {
      lo[l] = std::min(lo[l], x[l]);
      hi[l] = std::max(hi[l], x[l]);
    }
  }
  return dim == 1 ? hi[0] - lo[0] : (hi[0] - lo[0]) * (hi[1] - lo[1]);
}

void finalize_mesh(Mesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 2) throw Error("mesh: dimension must be 1 or 2");
  if (mesh.periodic && mesh.dim != 1) throw Error("mesh: periodic meshes are 1D only");
  if (mesh.periodic && !(mesh.period > 0.0)) throw Error("mesh: periodic mesh needs a positive period");
  if (mesh.cells.empty()) throw Error("mesh: no cells");
  const int n = mesh.num_nodes();
  const int nv = mesh.vertices_per_cell();
  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (int a = 0; a < nv; ++a) {
      const int v = mesh.cells[k][a];
      if (v < 0 || v >= n) {
        throw Error("mesh: cell " + std::to_string(k) + " references node " + std::to_string(v) +
                    " out of range [0," + std::to_string(n) + ")");
      }
    }
    if (nv == 2) mesh.cells[k][2] = -1;
  }

  mesh.measures.assign(mesh.num_cells(), 0.0);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    auto& c = mesh.cells[k];
    double measure = 0.0;
    if (mesh.dim == 1) {
      double left = mesh.nodes[c[0]][0], right = mesh.nodes[c[1]][0];
      if (mesh.periodic && right <= left) right += mesh.period;
      if (right < left) {
        std::swap(c[0], c[1]);
        std::swap(left, right);
      }
      measure = right - left;
    } else {
      double area = signed_area(mesh.nodes[c[0]], mesh.nodes[c[1]], mesh.nodes[c[2]]);
      if (area < 0.0) {
        std::swap(c[1], c[2]);
        area = -area;
      }
      measure = area;
    }
    if (!(measure > 0.0)) throw Error("mesh: cell " + std::to_string(k) + " has zero measure");
    mesh.measures[k] = measure;
  }

  double total = 0.0;
  for (double m : mesh.measures) total += m;
  const double domain = mesh.domain_measure();
  if (std::abs(total - domain) > 1e-12 * domain) {
    throw Error("mesh: cell measures sum to " + format_double(total) +
                " but the bounding domain measures " + format_double(domain));
  }

  mesh.boundary.assign(n, 0);
  if (mesh.dim == 1) {
    if (!mesh.periodic) {
      std::vector<int> count(n, 0);
      for (const auto& c : mesh.cells) {
        ++count[c[0]];
        ++count[c[1]];
      }
      for (int i = 0; i < n; ++i) mesh.boundary[i] = count[i] == 1;
    }
  } else {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& c : mesh.cells) {
      for (int a = 0; a < 3; ++a) {
        int u = c[a], v = c[(a + 1) % 3];
        if (u > v) std::swap(u, v);
        ++edges[{u, v}];
      }
    }
    for (const auto& [edge, count] : edges) {
      if (count > 2) throw Error("mesh: non-manifold edge");
      if (count == 1) mesh.boundary[edge.first] = mesh.boundary[edge.second] = 1;
    }
  }
}

Mesh build_interval_mesh(int n_cells, double x_min, double x_max, bool periodic) {
  if (n_cells < 2) throw Error("interval mesh: need at least 2 cells, got " + std::to_string(n_cells));
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw Error("interval mesh: degenerate bounds [" + format_double(x_min) + ", " + format_double(x_max) + "]");
  }
  Mesh mesh;
  mesh.dim = 1;
  mesh.periodic = periodic;
  mesh.period = periodic ? x_max - x_min : 0.0;
  const int n_nodes = periodic ? n_cells : n_cells + 1;
  const double h = (x_max - x_min) / n_cells;
  for (int i = 0; i < n_nodes; ++i) mesh.nodes.push_back({i == n_cells ? x_max : x_min + i * h, 0.0});
  for (int k = 0; k < n_cells; ++k) mesh.cells.push_back({k, (k + 1) % n_nodes, -1});
  finalize_mesh(mesh);
  return mesh;
}

Mesh build_triangle_mesh(int nx, int ny, const Rectangle& box, double perturbation, std::uint64_t seed) {
  if (nx < 2 || ny < 2) {
    throw Error("triangle mesh: need nx, ny >= 2, got " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) throw Error("triangle mesh: degenerate rectangle");
  if (!(perturbation >= 0.0 && perturbation < 0.3)) throw Error("triangle mesh: perturbation must lie in [0, 0.3)");

  const double hx = (box.x_max - box.x_min) / nx;
  const double hy = (box.y_max - box.y_min) / ny;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  Mesh mesh;
  mesh.dim = 2;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  double amplitude = perturbation;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    std::mt19937_64 rng(seed);
    mesh.nodes.clear();
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        Vec x{i == nx ? box.x_max : box.x_min + i * hx, j == ny ? box.y_max : box.y_min + j * hy};
        const double jx = symmetric_unit(rng), jy = symmetric_unit(rng);
        if (i > 0 && i < nx && j > 0 && j < ny) {
          x[0] += amplitude * hx * jx;
          x[1] += amplitude * hy * jy;
        }
        mesh.nodes.push_back(x);
      }
    }
    bool inverted = false;
    for (const auto& c : mesh.cells) {
      if (!(signed_area(mesh.nodes[c[0]], mesh.nodes[c[1]], mesh.nodes[c[2]]) > 0.0)) {
        inverted = true;
        break;
      }
    }
    if (!inverted) {
      finalize_mesh(mesh);
      return mesh;
    }
    amplitude *= 0.5;
  }
  throw Error("triangle mesh: perturbation inverts cells even after 5 halvings");
}

int Stencils::find(int i, int j) const {
  const auto first = cols.begin() + row_ptr[i];
  const auto last = cols.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - cols.begin()) : -1;
}

Stencils node_stencils(const Mesh& mesh) {
  const int n = mesh.num_nodes();
  const int nv = mesh.vertices_per_cell();
  std::vector<std::vector<int>> rows(n);
  for (const auto& c : mesh.cells) {
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) rows[c[a]].push_back(c[b]);
    }
  }
  Stencils s;
  s.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    s.row_ptr[i + 1] = s.row_ptr[i] + static_cast<int>(r.size());
  }
  s.cols.reserve(s.row_ptr[n]);
  for (const auto& r : rows) s.cols.insert(s.cols.end(), r.begin(), r.end());

  s.diag.assign(n, -1);
  s.transpose.assign(s.cols.size(), -1);
  for (int i = 0; i < n; ++i) {
    for (int e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
      const int j = s.cols[e];
      if (j == i) s.diag[i] = e;
      s.transpose[e] = s.find(j, i);
    }
  }

  // Shared cells per entry, in ascending cell order.
  std::vector<std::vector<int>> shared(s.cols.size());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cells[k];
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) shared[s.find(c[a], c[b])].push_back(k);
    }
  }
  s.entry_cell_ptr.assign(s.cols.size() + 1, 0);
  for (std::size_t e = 0; e < shared.size(); ++e) {
    s.entry_cell_ptr[e + 1] = s.entry_cell_ptr[e] + static_cast<int>(shared[e].size());
    s.entry_cells.insert(s.entry_cells.end(), shared[e].begin(), shared[e].end());
  }
  return s;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.dim << ' ' << mesh.num_nodes() << ' ' << mesh.num_cells() << ' '
      << (mesh.periodic ? format_double(mesh.period) : std::string("0")) << '\n';
  for (const auto& x : mesh.nodes) {
    out << format_double(x[0]);
    if (mesh.dim == 2) out << ' ' << format_double(x[1]);
    out << '\n';
  }
  for (const auto& c : mesh.cells) {
    out << c[0] << ' ' << c[1];
    if (mesh.dim == 2) out << ' ' << c[2];
    out << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  int n = 0, m = 0;
  std::string periodic_token;
  std::string header;
  if (!std::getline(in, header)) throw Error("mesh file: line 1: missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> mesh.dim >> n >> m >> periodic_token)) {
      throw Error("mesh file: line 1: expected `dim N M periodic`");
    }
  }
  if (mesh.dim != 1 && mesh.dim != 2) throw Error("mesh file: line 1: dim must be 1 or 2");
  if (n <= 0 || m <= 0) throw Error("mesh file: line 1: N and M must be positive");
  // The periodic field is 0, or the period length of a periodic 1D mesh.
  mesh.period = parse_double(periodic_token, "mesh file: line 1: periodic field");
  mesh.periodic = mesh.period != 0.0;

  std::string line;
  int line_no = 1;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw Error("mesh file: unexpected end of file while reading " + std::string(what));
  };
  for (int i = 0; i < n; ++i) {
    next_line("coordinates");
    std::istringstream ls(line);
    Vec x{};
    for (int l = 0; l < mesh.dim; ++l) {
      std::string tok;
      if (!(ls >> tok)) throw Error("mesh file: line " + std::to_string(line_no) + ": missing coordinate");
      x[l] = parse_double(tok, "mesh file: line " + std::to_string(line_no));
    }
    mesh.nodes.push_back(x);
  }
  for (int k = 0; k < m; ++k) {
    next_line("cells");
    std::istringstream ls(line);
    std::array<int, 3> c{-1, -1, -1};
    for (int a = 0; a <= mesh.dim; ++a) {
      if (!(ls >> c[a])) throw Error("mesh file: line " + std::to_string(line_no) + ": bad vertex index");
    }
    mesh.cells.push_back(c);
  }
  finalize_mesh(mesh);
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path);
  return read_mesh(in);
}

}  // namespace idp
