#include "kvflux/kernels.hpp"

namespace kvflux::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void csr_matvec(const CsrView& a, const double* x, double* y) {
  for (std::size_t row = 0; row < a.rows; ++row) {
    double s = 0.0;
    for (std::int32_t k = a.row_ptr[row]; k < a.row_ptr[row + 1]; ++k) s += a.val[k] * x[a.col[k]];
    y[row] = s;
  }
}

void dense_matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot(m + i * cols, x, cols);
}

void weighted_local_stiffness(const TriangleBatch& t, const QuadratureView& rule,
                              const LocalStiffness& out, std::size_t begin) {
  for (std::size_t e = begin; e < t.count; ++e) {
    const double b0 = t.z1[e] - t.z2[e], c0 = t.r2[e] - t.r1[e];
    const double b1 = t.z2[e] - t.z0[e], c1 = t.r0[e] - t.r2[e];
    const double b2 = t.z0[e] - t.z1[e], c2 = t.r1[e] - t.r0[e];
    const double twice_area = (t.r1[e] - t.r0[e]) * (t.z2[e] - t.z0[e]) -
                              (t.r2[e] - t.r0[e]) * (t.z1[e] - t.z0[e]);
    double mean_inv_r = 0.0;
    for (std::size_t q = 0; q < rule.points; ++q) {
      const double l1 = rule.l1[q], l2 = rule.l2[q], l0 = 1.0 - l1 - l2;
      const double r = l0 * t.r0[e] + l1 * t.r1[e] + l2 * t.r2[e];
      mean_inv_r += rule.weight[q] / r;
    }
    // (grad phi_i . grad phi_j) * area * mean(1/r) with grad phi_i = (b_i, c_i) / (2 area)
    const double scale = mean_inv_r / (2.0 * twice_area);
    out.k00[e] = (b0 * b0 + c0 * c0) * scale;
    out.k01[e] = (b0 * b1 + c0 * c1) * scale;
    out.k02[e] = (b0 * b2 + c0 * c2) * scale;
    out.k11[e] = (b1 * b1 + c1 * c1) * scale;
    out.k12[e] = (b1 * b2 + c1 * c2) * scale;
    out.k22[e] = (b2 * b2 + c2 * c2) * scale;
    out.area[e] = 0.5 * twice_area;
  }
}

}  // namespace kvflux::kernels::scalar
