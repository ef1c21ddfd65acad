#include "wsc/kernels.hpp"

#include <cstdlib>
#include <string>

namespace wsc::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using ScaleFn = void (*)(double, double*, std::size_t);

struct Table {
    Backend backend = Backend::scalar;
    DotFn dot = detail::dot_scalar;
    AxpyFn axpy = detail::axpy_scalar;
    ScaleFn scale = detail::scale_scalar;
};

bool cpu_supports_avx2() {
#if defined(WSC_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Table make_table(Backend b) {
    Table t;
#if defined(WSC_HAVE_AVX2_TU)
    if (b == Backend::avx2) {
        t.backend = Backend::avx2;
        t.dot = detail::dot_avx2;
        t.axpy = detail::axpy_avx2;
        t.scale = detail::scale_avx2;
    }
#else
    (void)b;
#endif
    return t;
}

Backend initial_backend() {
    const char* env = std::getenv("WSC_KERNELS");
    if (env != nullptr) {
        std::string s(env);
        if (s == "scalar") return Backend::scalar;
        if (s == "avx2" && cpu_supports_avx2()) return Backend::avx2;
        // "auto" or anything unrecognized falls through to detection
    }
    return cpu_supports_avx2() ? Backend::avx2 : Backend::scalar;
}

Table& table() {
    static Table t = make_table(initial_backend());
    return t;
}

}  // namespace

Backend active() { return table().backend; }

bool set_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_supports_avx2()) return false;
    table() = make_table(b);
    return true;
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

bool avx2_available() { return cpu_supports_avx2(); }

double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    table().axpy(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) {
    table().scale(alpha, x, n);
}

void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
    const DotFn f = table().dot;
    for (std::size_t r = 0; r < rows; ++r) y[r] = f(a + r * cols, x, cols);
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols,
                  const double* x, double* y) {
    const AxpyFn f = table().axpy;
    for (std::size_t r = 0; r < rows; ++r) f(x[r], a + r * cols, y, cols);
}

void rank1_update(double* a, std::size_t rows, std::size_t cols,
                  double alpha, const double* x, const double* y) {
    const AxpyFn f = table().axpy;
    for (std::size_t r = 0; r < rows; ++r) f(alpha * x[r], y, a + r * cols, cols);
}

}  // namespace wsc::kernels
