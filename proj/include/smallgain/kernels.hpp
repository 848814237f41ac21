#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Batch elementwise kernels behind a runtime-dispatched backend table.
//
// Two backends ship: a scalar reference implementation and an AVX2 variant.
// The active backend is picked once at startup (CPU detection, overridable
// with the SMALLGAIN_SIMD environment variable or force_backend()). Both
// backends implement identical per-element semantics — see
// detail/scalar_ops.hpp — and the test suite asserts bitwise equality
// between them, so dispatch never affects results.
//
// Transcendentals (pow, sin, cos, tan, exp, ln, tanh) call libm per element
// in every backend; only the plain IEEE arithmetic is vectorized.

namespace smallgain::kernels {

using BinaryKernel = void (*)(const double* a, const double* b, double* out, std::size_t n);
using UnaryKernel = void (*)(const double* a, double* out, std::size_t n);

struct KernelTable {
    const char* name;

    BinaryKernel add;
    BinaryKernel sub;
    BinaryKernel mul;
    BinaryKernel div;
    BinaryKernel pow;
    BinaryKernel min;  // a < b ? a : b (SSE/AVX convention)
    BinaryKernel max;  // a > b ? a : b

    UnaryKernel neg;
    UnaryKernel abs;
    UnaryKernel sign;  // sign(0) = 0, sign(NaN) = 0
    UnaryKernel sqrt;
    UnaryKernel sin;
    UnaryKernel cos;
    UnaryKernel tan;
    UnaryKernel exp;
    UnaryKernel ln;
    UnaryKernel tanh;

    void (*fill)(double value, double* out, std::size_t n);
    void (*copy)(const double* a, double* out, std::size_t n);

    // out = x + a*k (Runge-Kutta stage update; no FMA, matching scalar)
    void (*axpy)(double a, const double* x, const double* k, double* out, std::size_t n);
    // out = x + h/6 * (k1 + 2*k2 + 2*k3 + k4)
    void (*rk4_combine)(double h, const double* x, const double* k1, const double* k2,
                        const double* k3, const double* k4, double* out, std::size_t n);
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif

/// True when the running CPU supports AVX2.
bool avx2_available();

/// Backend currently in use.
Backend active_backend();

/// Kernel table for the active backend.
const KernelTable& active();

/// Override dispatch (tests, benchmarking). Throws smallgain::Error when the
/// requested backend is unavailable on this CPU.
void force_backend(Backend backend);

/// Re-run the default selection: SMALLGAIN_SIMD env override, else CPU probe.
void reset_backend();

std::string backend_name(Backend backend);

// Domain-violation scans shared by all backends (plain loops; the comparisons
// are exact so autovectorization cannot change the outcome).
void mask_negative(const double* a, std::uint8_t* mask, std::size_t n);
void mask_zero(const double* a, std::uint8_t* mask, std::size_t n);
void mask_nan(const double* a, std::uint8_t* mask, std::size_t n);

}  // namespace smallgain::kernels
