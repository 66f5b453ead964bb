#include <atomic>
#include <cstdlib>
#include <string>

#include "qgd/error.hpp"
#include "qgd/kernels.hpp"

namespace qgd::kernels {
namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy};
#if defined(QGD_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy};
#endif

bool cpu_has_avx2() noexcept {
#if defined(QGD_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const char* env = std::getenv("QGD_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return Backend::scalar;
  if (choice == "avx2" && cpu_has_avx2()) return Backend::avx2;
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& selected() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

const KernelTable& active() { return table_for(selected().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) noexcept {
  return b == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() noexcept { return selected().load(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw ConfigError("kernel backend '" + std::string(backend_name(b)) + "' is not available");
  selected().store(b);
}

const KernelTable& table_for(Backend b) {
#if defined(QGD_HAVE_AVX2_KERNELS)
  if (b == Backend::avx2) {
    if (!cpu_has_avx2()) throw ConfigError("avx2 kernels not supported by this CPU");
    return kAvx2Table;
  }
#else
  if (b == Backend::avx2) throw ConfigError("avx2 kernels not compiled in");
#endif
  return kScalarTable;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ConfigError("axpy: length mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<const double> bias, std::span<double> out) {
  if (w.size() != rows * cols || x.size() != cols || bias.size() != rows || out.size() != rows)
    throw ConfigError("gemv: dimension mismatch");
  const auto& k = active();
  for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + k.dot(w.data() + r * cols, x.data(), cols);
}

void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> v, std::span<double> out) {
  if (w.size() != rows * cols || v.size() != rows || out.size() != cols)
    throw ConfigError("gemv_t_acc: dimension mismatch");
  const auto& k = active();
  for (std::size_t r = 0; r < rows; ++r) k.axpy(v[r], w.data() + r * cols, out.data(), cols);
}

void rank1_acc(double alpha, std::span<const double> u, std::span<const double> v,
               std::span<double> w) {
  const std::size_t rows = u.size(), cols = v.size();
  if (w.size() != rows * cols) throw ConfigError("rank1_acc: dimension mismatch");
  const auto& k = active();
  for (std::size_t r = 0; r < rows; ++r) k.axpy(alpha * u[r], v.data(), w.data() + r * cols, cols);
}

}  // namespace qgd::kernels
