#include "ynkit/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ynk::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(YNK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend pick_backend() {
  const char* env = std::getenv("YNKIT_SIMD");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0)
      return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

}  // namespace

Backend active_backend() {
  static const Backend backend = pick_backend();
  return backend;
}

std::string backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(YNK_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return detail::dot_avx2(a, b, n);
#endif
  return detail::dot_scalar(a, b, n);
}

void matvec(const double* a, const double* x, const double* bias, double* y,
            std::size_t rows, std::size_t cols) {
#if defined(YNK_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return detail::matvec_avx2(a, x, bias, y, rows, cols);
#endif
  detail::matvec_scalar(a, x, bias, y, rows, cols);
}

void matvec_transposed(const double* a, const double* g, double* y,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], a + r * cols, y, cols);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(YNK_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return detail::axpy_avx2(alpha, x, y, n);
#endif
  detail::axpy_scalar(alpha, x, y, n);
}

void scale(double* x, double alpha, std::size_t n) {
#if defined(YNK_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return detail::scale_avx2(x, alpha, n);
#endif
  detail::scale_scalar(x, alpha, n);
}

void add_outer(double* a, const double* u, const double* v, double alpha,
               std::size_t rows, std::size_t cols) {
#if defined(YNK_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return detail::add_outer_avx2(a, u, v, alpha, rows, cols);
#endif
  detail::add_outer_scalar(a, u, v, alpha, rows, cols);
}

}  // namespace ynk::kernels
