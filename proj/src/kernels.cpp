#include "dlab/kernels.hpp"

#include <cstdlib>
#include <mutex>

#include "dlab/errors.hpp"

namespace dlab::kernels {

namespace scalar {

float dot(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

float sum(const float* x, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

float l2sq(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        const float d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double l2sq(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void vadd(const float* a, const float* b, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vadd(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vmul(const float* a, const float* b, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace scalar

#ifndef DLAB_HAVE_AVX2
namespace avx2 {
bool compiled() { return false; }
bool supported() { return false; }
float dot(const float*, const float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
double dot(const double*, const double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void axpy(float, const float*, float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void axpy(double, const double*, double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
float sum(const float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
double sum(const double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
float l2sq(const float*, const float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
double l2sq(const double*, const double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void vadd(const float*, const float*, float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void vadd(const double*, const double*, double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void vmul(const float*, const float*, float*, std::size_t) { throw Error("avx2 kernels not compiled"); }
void vmul(const double*, const double*, double*, std::size_t) { throw Error("avx2 kernels not compiled"); }
}  // namespace avx2
#endif

namespace {

Backend g_backend = Backend::Scalar;
detail::Table g_table{};
std::once_flag g_init_flag;

detail::Table make_table(Backend b) {
    if (b == Backend::Avx2) {
        return detail::Table{
            &avx2::dot, &avx2::dot, &avx2::axpy, &avx2::axpy,
            &avx2::sum, &avx2::sum, &avx2::l2sq, &avx2::l2sq,
            &avx2::vadd, &avx2::vadd, &avx2::vmul, &avx2::vmul,
        };
    }
    return detail::Table{
        &scalar::dot, &scalar::dot, &scalar::axpy, &scalar::axpy,
        &scalar::sum, &scalar::sum, &scalar::l2sq, &scalar::l2sq,
        &scalar::vadd, &scalar::vadd, &scalar::vmul, &scalar::vmul,
    };
}

void init_dispatch() {
    Backend b = avx2::supported() ? Backend::Avx2 : Backend::Scalar;
    if (const char* env = std::getenv("DLAB_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") {
            b = Backend::Scalar;
        } else if (want == "avx2") {
            if (!avx2::supported()) throw ConfigError("DLAB_KERNELS=avx2 requested but AVX2 is unavailable");
            b = Backend::Avx2;
        } else if (!want.empty()) {
            throw ConfigError("unknown DLAB_KERNELS value: " + want);
        }
    }
    g_backend = b;
    g_table = make_table(b);
}

}  // namespace

namespace detail {
const Table& table() {
    std::call_once(g_init_flag, init_dispatch);
    return g_table;
}
}  // namespace detail

Backend active_backend() {
    detail::table();
    return g_backend;
}

std::string backend_name() {
    return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    detail::table();  // ensure initialized
    if (b == Backend::Avx2 && !avx2::supported()) {
        throw ConfigError("cannot force avx2 kernels: unavailable on this CPU/build");
    }
    g_backend = b;
    g_table = make_table(b);
}

}  // namespace dlab::kernels
