#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// on x86-64 builds, an AVX2/FMA version. The active implementation is chosen
// once at startup from CPUID and can be overridden with KVFLUX_SIMD=scalar or
// programmatically (tests compare the two paths).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace kvflux::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// Best ISA the running CPU supports and this build was compiled for.
Isa detected_isa();
Isa active_isa();
// Throws std::invalid_argument when the requested ISA is unavailable.
void set_active_isa(Isa isa);

// RAII override, restores the previous ISA on scope exit.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// Compressed sparse row view. Column indices are 32-bit to allow hardware
// gathers.
struct CsrView {
  std::size_t rows = 0;
  const std::int32_t* row_ptr = nullptr;  // rows + 1 entries
  const std::int32_t* col = nullptr;
  const double* val = nullptr;
};

// Triangles in structure-of-arrays layout.
struct TriangleBatch {
  std::size_t count = 0;
  const double* r0 = nullptr;
  const double* z0 = nullptr;
  const double* r1 = nullptr;
  const double* z1 = nullptr;
  const double* r2 = nullptr;
  const double* z2 = nullptr;
};

// Quadrature on the reference triangle, barycentric (l1, l2) with l0 = 1-l1-l2;
// weights sum to one.
struct QuadratureView {
  std::size_t points = 0;
  const double* l1 = nullptr;
  const double* l2 = nullptr;
  const double* weight = nullptr;
};

// Output of the weighted stiffness kernel: for each triangle the six distinct
// entries of the 3x3 local matrix  K_ij = (grad phi_i . grad phi_j) * Q_T(1/r)
// and the signed area.
struct LocalStiffness {
  double* k00 = nullptr;
  double* k01 = nullptr;
  double* k02 = nullptr;
  double* k11 = nullptr;
  double* k12 = nullptr;
  double* k22 = nullptr;
  double* area = nullptr;
};

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y = A x
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
// y = M x for a dense row-major rows x cols matrix.
void dense_matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y);
void weighted_local_stiffness(const TriangleBatch& tris, const QuadratureView& rule,
                              const LocalStiffness& out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void csr_matvec(const CsrView& a, const double* x, double* y);
void dense_matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
void weighted_local_stiffness(const TriangleBatch& tris, const QuadratureView& rule,
                              const LocalStiffness& out, std::size_t begin = 0);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void csr_matvec(const CsrView& a, const double* x, double* y);
void dense_matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
void weighted_local_stiffness(const TriangleBatch& tris, const QuadratureView& rule,
                              const LocalStiffness& out);
}  // namespace avx2

}  // namespace kvflux::kernels
