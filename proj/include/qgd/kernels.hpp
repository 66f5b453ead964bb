#pragma once
// Dense linear-algebra kernels used by the network code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The active backend is chosen once at startup from the CPU
// feature bits and may be overridden with QGD_SIMD=scalar|avx2|auto or with
// set_backend(). Matrices are row-major.

#include <cstddef>
#include <span>
#include <string_view>

namespace qgd::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b) noexcept;

/// True when the backend was compiled in and the CPU supports it.
bool backend_available(Backend b) noexcept;

Backend active_backend() noexcept;

/// Throws ConfigError when `b` is not available.
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out = W x + bias, W is rows x cols.
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<const double> bias, std::span<double> out);

/// out += W^T v, W is rows x cols, v has `rows` entries, out has `cols`.
void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> v, std::span<double> out);

/// W += alpha * u v^T, u has `rows` entries, v has `cols`.
void rank1_acc(double alpha, std::span<const double> u, std::span<const double> v,
               std::span<double> w);

/// Function table for one backend. Exposed so tests can run backends side by
/// side without touching the global selection.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& table_for(Backend b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(QGD_HAVE_AVX2_KERNELS)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace qgd::kernels
