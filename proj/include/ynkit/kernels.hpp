#pragma once

#include <cstddef>
#include <string>

namespace ynk::kernels {

// Dense double-precision primitives behind the model's hot loops. Each entry
// point dispatches at runtime between the scalar reference kernels and the
// AVX2 variants (when the binary carries them and the CPU supports them).
//
// Equivalence contract, checked by tests/test_kernels.cpp:
//   - axpy / scale / add_outer perform the same IEEE operations per element
//     in every lane and match the scalar reference bit for bit. None of the
//     lanes use FMA contraction.
//   - dot / matvec reassociate the summation, so lanes agree only up to
//     rounding; tests bound the relative difference.
enum class Backend { scalar, avx2 };

// Selected once per process. Honors YNKIT_SIMD=scalar|avx2|auto (default
// auto); requesting avx2 on hardware without it falls back to scalar.
Backend active_backend();
std::string backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);

// y = A x (+ bias when non-null); A is rows x cols, row-major.
void matvec(const double* a, const double* x, const double* bias, double* y,
            std::size_t rows, std::size_t cols);

// y[j] = sum_i A[i][j] g[i]; A is rows x cols, row-major. Implemented as a
// fixed-order sequence of axpy rows, so it is bitwise lane-independent.
void matvec_transposed(const double* a, const double* g, double* y,
                       std::size_t rows, std::size_t cols);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x *= alpha
void scale(double* x, double alpha, std::size_t n);

// A += alpha * u v^T; A is rows x cols, row-major.
void add_outer(double* a, const double* u, const double* v, double alpha,
               std::size_t rows, std::size_t cols);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void matvec_scalar(const double* a, const double* x, const double* bias,
                   double* y, std::size_t rows, std::size_t cols);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double* x, double alpha, std::size_t n);
void add_outer_scalar(double* a, const double* u, const double* v, double alpha,
                      std::size_t rows, std::size_t cols);

#if defined(YNK_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void matvec_avx2(const double* a, const double* x, const double* bias,
                 double* y, std::size_t rows, std::size_t cols);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double* x, double alpha, std::size_t n);
void add_outer_avx2(double* a, const double* u, const double* v, double alpha,
                    std::size_t rows, std::size_t cols);
#endif

}  // namespace detail

}  // namespace ynk::kernels
