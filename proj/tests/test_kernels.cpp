#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qgd/error.hpp"
#include "qgd/kernels.hpp"

using namespace qgd::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

class BackendGuard {
 public:
  BackendGuard() : saved_(active_backend()) {}
  ~BackendGuard() { set_backend(saved_); }

 private:
  Backend saved_;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(backend_available(Backend::scalar));
  EXPECT_EQ(backend_name(Backend::scalar), "scalar");
}

TEST(Kernels, DotMatchesNaiveSum) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 33u, 130u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
    EXPECT_DOUBLE_EQ(scalar::dot(a.data(), b.data(), n), scalar::dot(a.data(), b.data(), n));
    EXPECT_LT(rel(scalar::dot(a.data(), b.data(), n), static_cast<double>(ref)), 1e-13);
  }
}

TEST(Kernels, Avx2MatchesScalar) {
  if (!backend_available(Backend::avx2)) GTEST_SKIP() << "avx2 not available";
  std::mt19937_64 rng(2);
  const auto& s = table_for(Backend::scalar);
  const auto& v = table_for(Backend::avx2);
  for (std::size_t n = 0; n < 70; ++n) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    EXPECT_LT(rel(v.dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n)), 1e-13) << n;
    auto y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(rel(y2[i], y1[i]), 1e-15);
  }
}

TEST(Kernels, MatrixKernelsAgreeAcrossBackends) {
  if (!backend_available(Backend::avx2)) GTEST_SKIP() << "avx2 not available";
  BackendGuard guard;
  std::mt19937_64 rng(3);
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {32, 6}, {16, 32}, {3, 17}}) {
    auto w = random_vec(rng, rows * cols), x = random_vec(rng, cols), bias = random_vec(rng, rows);
    auto u = random_vec(rng, rows);
    std::vector<double> out[2], back[2], w2[2];
    for (int k = 0; k < 2; ++k) {
      set_backend(k == 0 ? Backend::scalar : Backend::avx2);
      out[k].assign(rows, 0.0);
      gemv(w, rows, cols, x, bias, out[k]);
      back[k].assign(cols, 1.0);
      gemv_t_acc(w, rows, cols, u, back[k]);
      w2[k] = w;
      rank1_acc(-0.5, u, x, w2[k]);
    }
    for (std::size_t i = 0; i < rows; ++i) EXPECT_LT(rel(out[1][i], out[0][i]), 1e-13);
    for (std::size_t i = 0; i < cols; ++i) EXPECT_LT(rel(back[1][i], back[0][i]), 1e-13);
    for (std::size_t i = 0; i < rows * cols; ++i) EXPECT_LT(rel(w2[1][i], w2[0][i]), 1e-15);
  }
}

TEST(Kernels, GemvMatchesDefinition) {
  BackendGuard guard;
  set_backend(Backend::scalar);
  const std::vector<double> w = {1, 2, 3, 4, 5, 6};
  const std::vector<double> x = {1, -1, 2};
  const std::vector<double> b = {0.5, -0.5};
  std::vector<double> out(2);
  gemv(w, 2, 3, x, b, out);
  EXPECT_EQ(out[0], 1 - 2 + 6 + 0.5);
  EXPECT_EQ(out[1], 4 - 5 + 12 - 0.5);
}

TEST(Kernels, SetUnavailableBackendThrows) {
  if (backend_available(Backend::avx2)) GTEST_SKIP() << "avx2 present";
  EXPECT_THROW(set_backend(Backend::avx2), qgd::ConfigError);
}
