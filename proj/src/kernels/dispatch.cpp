#include <atomic>
#include <cstdlib>
#include <string>

#include "smallgain/errors.hpp"
#include "smallgain/kernels.hpp"

namespace smallgain::kernels {

namespace {

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

Backend default_backend() {
    if (const char* env = std::getenv("SMALLGAIN_SIMD")) {
        std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2") {
            if (!avx2_available()) {
                throw Error("SMALLGAIN_SIMD=avx2 but the CPU has no AVX2");
            }
            return Backend::Avx2;
        }
        // anything else (incl. "auto") falls through to detection
    }
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

const KernelTable& table_for(Backend backend) {
#if defined(__x86_64__) || defined(_M_X64)
    if (backend == Backend::Avx2) return avx2_table();
#endif
    return scalar_table();
}

void select(Backend backend) {
    g_backend.store(backend, std::memory_order_relaxed);
    g_active.store(&table_for(backend), std::memory_order_release);
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        select(default_backend());
        t = g_active.load(std::memory_order_acquire);
    }
    return *t;
}

Backend active_backend() {
    active();
    return g_backend.load(std::memory_order_relaxed);
}

void force_backend(Backend backend) {
    if (backend == Backend::Avx2 && !avx2_available()) {
        throw Error("AVX2 backend unavailable on this CPU");
    }
    select(backend);
}

void reset_backend() {
    select(default_backend());
}

std::string backend_name(Backend backend) {
    return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace smallgain::kernels
