#pragma once

#include <cstddef>
#include <string>

// Vector kernels behind the inner loops (convolution, dense layers, LSTM
// gates, pairwise distances). Scalar reference implementations are always
// available; an AVX2 variant is selected at runtime when the CPU supports it.
// All kernels use a fixed reduction order, so results are reproducible for a
// given backend. Set DLAB_KERNELS=scalar|avx2 to override the dispatch.

namespace dlab::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
std::string backend_name();
// Throws dlab::ConfigError if the requested backend is unavailable.
void force_backend(Backend b);

namespace detail {
struct Table {
    float (*dot_f32)(const float*, const float*, std::size_t);
    double (*dot_f64)(const double*, const double*, std::size_t);
    void (*axpy_f32)(float, const float*, float*, std::size_t);
    void (*axpy_f64)(double, const double*, double*, std::size_t);
    float (*sum_f32)(const float*, std::size_t);
    double (*sum_f64)(const double*, std::size_t);
    float (*l2sq_f32)(const float*, const float*, std::size_t);
    double (*l2sq_f64)(const double*, const double*, std::size_t);
    void (*vadd_f32)(const float*, const float*, float*, std::size_t);
    void (*vadd_f64)(const double*, const double*, double*, std::size_t);
    void (*vmul_f32)(const float*, const float*, float*, std::size_t);
    void (*vmul_f64)(const double*, const double*, double*, std::size_t);
};
const Table& table();
}  // namespace detail

// dot(a, b) = sum_i a[i]*b[i]
inline float dot(const float* a, const float* b, std::size_t n) { return detail::table().dot_f32(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return detail::table().dot_f64(a, b, n); }

// y += alpha * x
inline void axpy(float alpha, const float* x, float* y, std::size_t n) { detail::table().axpy_f32(alpha, x, y, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { detail::table().axpy_f64(alpha, x, y, n); }

inline float sum(const float* x, std::size_t n) { return detail::table().sum_f32(x, n); }
inline double sum(const double* x, std::size_t n) { return detail::table().sum_f64(x, n); }

// l2sq(a, b) = sum_i (a[i]-b[i])^2
inline float l2sq(const float* a, const float* b, std::size_t n) { return detail::table().l2sq_f32(a, b, n); }
inline double l2sq(const double* a, const double* b, std::size_t n) { return detail::table().l2sq_f64(a, b, n); }

inline void vadd(const float* a, const float* b, float* out, std::size_t n) { detail::table().vadd_f32(a, b, out, n); }
inline void vadd(const double* a, const double* b, double* out, std::size_t n) { detail::table().vadd_f64(a, b, out, n); }
inline void vmul(const float* a, const float* b, float* out, std::size_t n) { detail::table().vmul_f32(a, b, out, n); }
inline void vmul(const double* a, const double* b, double* out, std::size_t n) { detail::table().vmul_f64(a, b, out, n); }

// Direct access to the per-backend implementations, used by the equivalence
// tests; library code goes through the dispatched entry points above.
namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);
double l2sq(const double* a, const double* b, std::size_t n);
void vadd(const float* a, const float* b, float* out, std::size_t n);
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vmul(const float* a, const float* b, float* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();   // translation unit built with AVX2 support
bool supported();  // compiled and the CPU reports AVX2+FMA
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);
double l2sq(const double* a, const double* b, std::size_t n);
void vadd(const float* a, const float* b, float* out, std::size_t n);
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vmul(const float* a, const float* b, float* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2

}  // namespace dlab::kernels
