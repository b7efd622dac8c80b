#include <immintrin.h>

#include <cmath>
#include <limits>

#include "idp/kernels.hpp"

namespace idp::kernels {

namespace {

__m256i lane_mask(int active) {
  const __m256i lanes = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(active), lanes);
}

__m128i lane_mask32(int active) {
  const __m128i lanes = _mm_setr_epi32(0, 1, 2, 3);
  return _mm_cmpgt_epi32(_mm_set1_epi32(active), lanes);
}

double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// One lane per conserved component. Same operation order as the scalar
// kernel, hence bitwise-identical results.
void graph_update_components(const GraphUpdateArgs& a) {
  const int m = a.components;
  const int d = a.dim;
  const __m256i mask = lane_mask(m);
  for (int i = 0; i < a.num_rows; ++i) {
    const __m256d ui = _mm256_maskload_pd(a.state + i * m, mask);
    const __m256d fix = _mm256_maskload_pd(a.flux + i * d * m, mask);
    const __m256d fiy = d == 2 ? _mm256_maskload_pd(a.flux + i * d * m + m, mask) : _mm256_setzero_pd();
    __m256d acc = _mm256_setzero_pd();
    for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const int j = a.cols[e];
      const __m256d uj = _mm256_maskload_pd(a.state + j * m, mask);
      const __m256d fjx = _mm256_maskload_pd(a.flux + j * d * m, mask);
      __m256d t = _mm256_mul_pd(_mm256_set1_pd(a.viscosity[e]), _mm256_sub_pd(uj, ui));
      t = _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(a.cx[e]), _mm256_sub_pd(fjx, fix)));
      if (d == 2) {
        const __m256d fjy = _mm256_maskload_pd(a.flux + j * d * m + m, mask);
        t = _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(a.cy[e]), _mm256_sub_pd(fjy, fiy)));
      }
      acc = _mm256_add_pd(acc, t);
    }
    const __m256d factor = _mm256_set1_pd(a.dt / a.mass[i]);
    _mm256_maskstore_pd(a.out + i * m, mask, _mm256_add_pd(ui, _mm256_mul_pd(factor, acc)));
  }
}

// Scalar conservation laws: four stencil entries per lane group, gathered.
void graph_update_entries(const GraphUpdateArgs& a) {
  const int d = a.dim;
  const __m128i stride = _mm_set1_epi32(d);
  for (int i = 0; i < a.num_rows; ++i) {
    const __m256d ui = _mm256_set1_pd(a.state[i]);
    const __m256d fix = _mm256_set1_pd(a.flux[i * d]);
    const __m256d fiy = _mm256_set1_pd(d == 2 ? a.flux[i * d + 1] : 0.0);
    __m256d acc = _mm256_setzero_pd();
    const int end = a.row_ptr[i + 1];
    for (int e = a.row_ptr[i]; e < end; e += 4) {
      const int active = end - e < 4 ? end - e : 4;
      const __m256i mask = lane_mask(active);
      const __m128i mask32 = lane_mask32(active);
      const __m128i j = _mm_maskload_epi32(a.cols + e, mask32);
      const __m128i jf = _mm_mullo_epi32(j, stride);
      const __m256d zero = _mm256_setzero_pd();
      const __m256d uj = _mm256_mask_i32gather_pd(zero, a.state, j, _mm256_castsi256_pd(mask), 8);
      const __m256d fjx = _mm256_mask_i32gather_pd(zero, a.flux, jf, _mm256_castsi256_pd(mask), 8);
      const __m256d visc = _mm256_maskload_pd(a.viscosity + e, mask);
      const __m256d cx = _mm256_maskload_pd(a.cx + e, mask);
      __m256d t = _mm256_mul_pd(visc, _mm256_sub_pd(uj, ui));
      t = _mm256_sub_pd(t, _mm256_mul_pd(cx, _mm256_sub_pd(fjx, fix)));
      if (d == 2) {
        const __m256d fjy = _mm256_mask_i32gather_pd(zero, a.flux + 1, jf, _mm256_castsi256_pd(mask), 8);
        const __m256d cy = _mm256_maskload_pd(a.cy + e, mask);
        t = _mm256_sub_pd(t, _mm256_mul_pd(cy, _mm256_sub_pd(fjy, fiy)));
      }
      // Masked-off lanes hold zeros in every operand, so they add nothing.
      acc = _mm256_add_pd(acc, t);
    }
    a.out[i] = a.state[i] + (a.dt / a.mass[i]) * horizontal_sum(acc);
  }
}

void graph_update_avx2(const GraphUpdateArgs& a) {
  if (a.components == 1) {
    graph_update_entries(a);
  } else {
    graph_update_components(a);
  }
}

void linear_combination_avx2(std::span<double> out, double a, std::span<const double> x, double b,
                             std::span<const double> y) {
  const std::size_t n = out.size();
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x.data() + k)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y.data() + k)));
    _mm256_storeu_pd(out.data() + k, r);
  }
  for (; k < n; ++k) out[k] = a * x[k] + b * y[k];
}

void weighted_sums_avx2(std::span<const double> w, std::span<const double> values, int m, std::span<double> sums) {
  const __m256i mask = lane_mask(m);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const __m256d row = _mm256_maskload_pd(values.data() + i * m, mask);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(w[i]), row));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (int k = 0; k < m; ++k) sums[k] = lanes[k];
}

double cfl_bound_avx2(std::span<const double> mass, std::span<const double> diagonal) {
  const std::size_t n = mass.size();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d best = inf;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dii = _mm256_andnot_pd(sign, _mm256_loadu_pd(diagonal.data() + k));
    const __m256d ratio = _mm256_div_pd(_mm256_loadu_pd(mass.data() + k), _mm256_mul_pd(two, dii));
    const __m256d nonzero = _mm256_cmp_pd(dii, _mm256_setzero_pd(), _CMP_GT_OQ);
    best = _mm256_min_pd(best, _mm256_blendv_pd(inf, ratio, nonzero));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double bound = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  for (; k < n; ++k) {
    const double dii = std::abs(diagonal[k]);
    if (dii > 0.0) bound = std::min(bound, mass[k] / (2.0 * dii));
  }
  return bound;
}

const KernelTable kAvx2{Isa::avx2, graph_update_avx2, linear_combination_avx2, weighted_sums_avx2, cfl_bound_avx2};

}  // namespace

const KernelTable* detail::avx2_table() { return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr; }

}  // namespace idp::kernels
