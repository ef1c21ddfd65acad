#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels behind the numeric hot loops (Hopfield
// local fields / energies, MLP forward and backprop, Hebbian updates).
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. Selection is process-wide
// and can be forced through set_backend() or the WSC_KERNELS environment
// variable ("scalar", "avx2", "auto").

namespace wsc::kernels {

enum class Backend { scalar, avx2 };

// Currently active backend.
Backend active();

// Force a backend. Returns false (and leaves the selection unchanged)
// if the requested backend is not available on this CPU/build.
bool set_backend(Backend b);

const char* backend_name(Backend b);

// True if the AVX2 variants were compiled in and the CPU supports AVX2+FMA.
bool avx2_available();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scale(double alpha, double* x, std::size_t n);

// y = A x for row-major A (rows x cols). y must not alias A or x.
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);

// y += A^T x for row-major A (rows x cols); x has `rows` entries,
// y has `cols` entries.
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols,
                  const double* x, double* y);

// A += alpha * x y^T for row-major A (rows x cols).
void rank1_update(double* a, std::size_t rows, std::size_t cols,
                  double alpha, const double* x, const double* y);

// Direct entry points, used by the backend equivalence tests.
namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double alpha, double* x, std::size_t n);

#if defined(WSC_HAVE_AVX2_TU)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double alpha, double* x, std::size_t n);
#endif

}  // namespace detail

}  // namespace wsc::kernels
