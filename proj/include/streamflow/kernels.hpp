#pragma once

// Dense double-precision kernels used by the LSTM inner loops.
//
// Every kernel has a scalar reference implementation. Vectorised variants
// are compiled separately with the matching target flags and selected at
// runtime from CPU feature detection; STREAMFLOW_KERNELS=scalar|avx2 forces
// a backend. All matrices are row-major and densely packed.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace streamflow::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

struct KernelTable {
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = W x + bias   (W: rows x cols; bias may be null)
    void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y);
    // y += W^T v       (W: rows x cols, v: rows, y: cols)
    void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* v,
                       double* y);
    // W += u x^T       (u: rows, x: cols)
    void (*rank1_acc)(double* w, std::size_t rows, std::size_t cols, const double* u,
                      const double* x);
};

const KernelTable& scalar_table();
/// Table for `b`; throws ConfigError when the backend is not compiled in or
/// not supported by this CPU.
const KernelTable& table(Backend b);
bool backend_available(Backend b);
std::vector<Backend> available_backends();

/// Backend in use for the span wrappers below and the model code.
Backend active_backend();
const KernelTable& active();
void set_active_backend(Backend b);

/// Restores the previous backend on destruction (tests).
class ScopedBackend {
public:
    explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_active_backend(b); }
    ~ScopedBackend() { set_active_backend(previous_); }
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend previous_;
};

// Span front-ends over the active table. Sizes are checked.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> bias, std::span<double> y);
void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> v, std::span<double> y);
void rank1_acc(std::span<double> w, std::size_t rows, std::size_t cols, std::span<const double> u,
               std::span<const double> x);

}  // namespace streamflow::kernels
