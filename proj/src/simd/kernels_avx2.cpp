#include <immintrin.h>

#include "kvflux/kernels.hpp"

namespace kvflux::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

bool compiled() { return true; }

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void csr_matvec(const CsrView& a, const double* x, double* y) {
  for (std::size_t row = 0; row < a.rows; ++row) {
    std::int32_t k = a.row_ptr[row];
    const std::int32_t end = a.row_ptr[row + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.col + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.val + k), xv, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += a.val[k] * x[a.col[k]];
    y[row] = s;
  }
}

void dense_matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot(m + i * cols, x, cols);
}

void weighted_local_stiffness(const TriangleBatch& t, const QuadratureView& rule,
                              const LocalStiffness& out) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t e = 0;
  for (; e + 4 <= t.count; e += 4) {
    const __m256d r0 = _mm256_loadu_pd(t.r0 + e), z0 = _mm256_loadu_pd(t.z0 + e);
    const __m256d r1 = _mm256_loadu_pd(t.r1 + e), z1 = _mm256_loadu_pd(t.z1 + e);
    const __m256d r2 = _mm256_loadu_pd(t.r2 + e), z2 = _mm256_loadu_pd(t.z2 + e);
    const __m256d b0 = _mm256_sub_pd(z1, z2), c0 = _mm256_sub_pd(r2, r1);
    const __m256d b1 = _mm256_sub_pd(z2, z0), c1 = _mm256_sub_pd(r0, r2);
    const __m256d b2 = _mm256_sub_pd(z0, z1), c2 = _mm256_sub_pd(r1, r0);
    const __m256d twice_area = _mm256_fmsub_pd(_mm256_sub_pd(r1, r0), _mm256_sub_pd(z2, z0),
                                               _mm256_mul_pd(_mm256_sub_pd(r2, r0), _mm256_sub_pd(z1, z0)));
    __m256d mean_inv_r = _mm256_setzero_pd();
    for (std::size_t q = 0; q < rule.points; ++q) {
      const __m256d l1 = _mm256_set1_pd(rule.l1[q]);
      const __m256d l2 = _mm256_set1_pd(rule.l2[q]);
      const __m256d l0 = _mm256_sub_pd(_mm256_sub_pd(one, l1), l2);
      const __m256d r = _mm256_fmadd_pd(l2, r2, _mm256_fmadd_pd(l1, r1, _mm256_mul_pd(l0, r0)));
      mean_inv_r = _mm256_add_pd(mean_inv_r, _mm256_div_pd(_mm256_set1_pd(rule.weight[q]), r));
    }
    const __m256d scale = _mm256_div_pd(mean_inv_r, _mm256_mul_pd(two, twice_area));
    auto entry = [&](__m256d bi, __m256d ci, __m256d bj, __m256d cj) {
      return _mm256_mul_pd(_mm256_fmadd_pd(bi, bj, _mm256_mul_pd(ci, cj)), scale);
    };
    _mm256_storeu_pd(out.k00 + e, entry(b0, c0, b0, c0));
    _mm256_storeu_pd(out.k01 + e, entry(b0, c0, b1, c1));
    _mm256_storeu_pd(out.k02 + e, entry(b0, c0, b2, c2));
    _mm256_storeu_pd(out.k11 + e, entry(b1, c1, b1, c1));
    _mm256_storeu_pd(out.k12 + e, entry(b1, c1, b2, c2));
    _mm256_storeu_pd(out.k22 + e, entry(b2, c2, b2, c2));
    _mm256_storeu_pd(out.area + e, _mm256_mul_pd(half, twice_area));
  }
  scalar::weighted_local_stiffness(t, rule, out, e);
}

}  // namespace kvflux::kernels::avx2
