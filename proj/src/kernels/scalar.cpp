#include "kernels/variants.hpp"

namespace streamflow::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_scalar(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
    }
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* v,
                       double* y) {
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(v[r], w + r * cols, y, cols);
}

void rank1_acc_scalar(double* w, std::size_t rows, std::size_t cols, const double* u,
                      const double* x) {
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(u[r], x, w + r * cols, cols);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{dot_scalar, axpy_scalar, gemv_scalar, gemv_t_acc_scalar,
                               rank1_acc_scalar};
    return t;
}

}  // namespace streamflow::kernels
