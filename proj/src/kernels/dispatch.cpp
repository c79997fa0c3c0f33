#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels/variants.hpp"
#include "streamflow/errors.hpp"

namespace streamflow::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(STREAMFLOW_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_default() {
    if (const char* env = std::getenv("STREAMFLOW_KERNELS")) {
        const std::string v = env;
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& active_slot() {
    static std::atomic<Backend> slot{detect_default()};
    return slot;
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

bool backend_available(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::scalar};
    if (backend_available(Backend::avx2)) out.push_back(Backend::avx2);
    return out;
}

const KernelTable& table(Backend b) {
    if (!backend_available(b)) {
        throw ConfigError("kernel backend '" + std::string(backend_name(b)) + "' is not available");
    }
#if defined(STREAMFLOW_WITH_AVX2)
    if (b == Backend::avx2) return detail::avx2_table();
#endif
    return scalar_table();
}

Backend active_backend() { return active_slot().load(std::memory_order_relaxed); }

const KernelTable& active() { return table(active_backend()); }

void set_active_backend(Backend b) {
    table(b);  // validates
    active_slot().store(b, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("dot operand", a.size(), b.size());
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw ShapeError("axpy operand", x.size(), y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> bias, std::span<double> y) {
    if (w.size() != rows * cols) throw ShapeError("gemv matrix", rows * cols, w.size());
    if (x.size() != cols) throw ShapeError("gemv input", cols, x.size());
    if (y.size() != rows) throw ShapeError("gemv output", rows, y.size());
    if (!bias.empty() && bias.size() != rows) throw ShapeError("gemv bias", rows, bias.size());
    active().gemv(w.data(), rows, cols, x.data(), bias.empty() ? nullptr : bias.data(), y.data());
}

void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> v, std::span<double> y) {
    if (w.size() != rows * cols) throw ShapeError("gemv_t matrix", rows * cols, w.size());
    if (v.size() != rows) throw ShapeError("gemv_t input", rows, v.size());
    if (y.size() != cols) throw ShapeError("gemv_t output", cols, y.size());
    active().gemv_t_acc(w.data(), rows, cols, v.data(), y.data());
}

void rank1_acc(std::span<double> w, std::size_t rows, std::size_t cols, std::span<const double> u,
               std::span<const double> x) {
    if (w.size() != rows * cols) throw ShapeError("rank1 matrix", rows * cols, w.size());
    if (u.size() != rows) throw ShapeError("rank1 row vector", rows, u.size());
    if (x.size() != cols) throw ShapeError("rank1 column vector", cols, x.size());
    active().rank1_acc(w.data(), rows, cols, u.data(), x.data());
}

}  // namespace streamflow::kernels
