#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "idp/kernels.hpp"

namespace idp::kernels {

namespace {

void graph_update_scalar(const GraphUpdateArgs& a) {
  const int m = a.components;
  const int d = a.dim;
  for (int i = 0; i < a.num_rows; ++i) {
    const double* ui = a.state + i * m;
    const double* fi = a.flux + i * d * m;
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const int j = a.cols[e];
      const double* uj = a.state + j * m;
      const double* fj = a.flux + j * d * m;
      for (int k = 0; k < m; ++k) {
        double t = a.viscosity[e] * (uj[k] - ui[k]);
        t = t - a.cx[e] * (fj[k] - fi[k]);
        if (d == 2) t = t - a.cy[e] * (fj[m + k] - fi[m + k]);
        acc[k] = acc[k] + t;
      }
    }
    const double factor = a.dt / a.mass[i];
    for (int k = 0; k < m; ++k) a.out[i * m + k] = ui[k] + factor * acc[k];
  }
}

void linear_combination_scalar(std::span<double> out, double a, std::span<const double> x, double b,
                               std::span<const double> y) {
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = a * x[n] + b * y[n];
}

void weighted_sums_scalar(std::span<const double> w, std::span<const double> values, int m,
                          std::span<double> sums) {
  for (int k = 0; k < m; ++k) sums[k] = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (int k = 0; k < m; ++k) sums[k] = sums[k] + w[i] * values[i * m + k];
  }
}

double cfl_bound_scalar(std::span<const double> mass, std::span<const double> diagonal) {
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double dii = std::abs(diagonal[i]);
    if (dii > 0.0) bound = std::min(bound, mass[i] / (2.0 * dii));
  }
  return bound;
}

const KernelTable kScalar{Isa::scalar, graph_update_scalar, linear_combination_scalar, weighted_sums_scalar,
                          cfl_bound_scalar};

const KernelTable* initial_selection() {
  if (const char* env = std::getenv("IDP_KERNELS")) {
    const std::string choice(env);
    if (choice == "scalar") return &kScalar;
    if (choice == "avx2" && detail::avx2_table()) return detail::avx2_table();
  }
  if (detail::avx2_table()) return detail::avx2_table();
  return &kScalar;
}

const KernelTable*& current() {
  static const KernelTable* selected = initial_selection();
  return selected;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return kScalar; }

bool available(Isa isa) { return isa == Isa::scalar || detail::avx2_table() != nullptr; }

const KernelTable& table(Isa isa) {
  if (isa == Isa::scalar) return kScalar;
  if (const auto* t = detail::avx2_table()) return *t;
  throw std::runtime_error("kernels: AVX2 is not available on this machine");
}

const KernelTable& active() { return *current(); }

void select(Isa isa) { current() = &table(isa); }

}  // namespace idp::kernels
