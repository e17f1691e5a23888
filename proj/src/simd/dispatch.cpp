#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kvflux/kernels.hpp"

namespace kvflux::kernels {

#ifndef KVFLUX_WITH_AVX2
namespace avx2 {
// Stubs for builds without the AVX2 translation unit; never selected.
bool compiled() { return false; }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void csr_matvec(const CsrView& a, const double* x, double* y) { scalar::csr_matvec(a, x, y); }
void dense_matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  scalar::dense_matvec(m, rows, cols, x, y);
}
void weighted_local_stiffness(const TriangleBatch& t, const QuadratureView& rule, const LocalStiffness& out) {
  scalar::weighted_local_stiffness(t, rule, out);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("KVFLUX_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
  return detected_isa();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() { return avx2::compiled() && cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2)
    throw std::invalid_argument("AVX2 kernels are not available on this machine");
  current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_length(a.size(), b.size(), "dot");
  return active_isa() == Isa::Avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                   : scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_length(x.size(), y.size(), "axpy");
  if (active_isa() == Isa::Avx2)
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  else
    scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
  check_length(a.rows, y.size(), "csr_matvec");
  if (active_isa() == Isa::Avx2)
    avx2::csr_matvec(a, x.data(), y.data());
  else
    scalar::csr_matvec(a, x.data(), y.data());
}

void dense_matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y) {
  check_length(m.size(), rows * cols, "dense_matvec");
  check_length(x.size(), cols, "dense_matvec");
  check_length(y.size(), rows, "dense_matvec");
  if (active_isa() == Isa::Avx2)
    avx2::dense_matvec(m.data(), rows, cols, x.data(), y.data());
  else
    scalar::dense_matvec(m.data(), rows, cols, x.data(), y.data());
}

void weighted_local_stiffness(const TriangleBatch& tris, const QuadratureView& rule,
                              const LocalStiffness& out) {
  if (active_isa() == Isa::Avx2)
    avx2::weighted_local_stiffness(tris, rule, out);
  else
    scalar::weighted_local_stiffness(tris, rule, out);
}

}  // namespace kvflux::kernels
