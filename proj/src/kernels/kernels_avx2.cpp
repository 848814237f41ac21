#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "smallgain/detail/scalar_ops.hpp"
#include "smallgain/kernels.hpp"

// AVX2 backend: 4-wide double lanes with a scalar remainder loop. Operation
// order and rounding match the scalar backend exactly (no FMA; min/max keep
// the native vminpd/vmaxpd semantics which the scalar ops mirror).

namespace smallgain::kernels {

namespace {

using namespace smallgain::detail;

inline __m256d load(const double* p) { return _mm256_loadu_pd(p); }
inline void store(double* p, __m256d v) { _mm256_storeu_pd(p, v); }

#define SG_BINARY_AVX2(NAME, VECOP, SCALAROP)                                        \
    void NAME(const double* a, const double* b, double* out, std::size_t n) {        \
        std::size_t i = 0;                                                           \
        for (; i + 4 <= n; i += 4) store(out + i, VECOP(load(a + i), load(b + i)));  \
        for (; i < n; ++i) out[i] = SCALAROP(a[i], b[i]);                            \
    }

SG_BINARY_AVX2(add_avx2, _mm256_add_pd, op_add)
SG_BINARY_AVX2(sub_avx2, _mm256_sub_pd, op_sub)
SG_BINARY_AVX2(mul_avx2, _mm256_mul_pd, op_mul)
SG_BINARY_AVX2(div_avx2, _mm256_div_pd, op_div)
SG_BINARY_AVX2(min_avx2, _mm256_min_pd, op_min)
SG_BINARY_AVX2(max_avx2, _mm256_max_pd, op_max)

#undef SG_BINARY_AVX2

void pow_avx2(const double* a, const double* b, double* out, std::size_t n) {
    // libm per lane; bitwise-identical to the scalar backend by construction.
    for (std::size_t i = 0; i < n; ++i) out[i] = op_pow(a[i], b[i]);
}

void neg_avx2(const double* a, double* out, std::size_t n) {
    const __m256d signbit = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(out + i, _mm256_xor_pd(load(a + i), signbit));
    for (; i < n; ++i) out[i] = op_neg(a[i]);
}

void abs_avx2(const double* a, double* out, std::size_t n) {
    const __m256d signbit = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(out + i, _mm256_andnot_pd(signbit, load(a + i)));
    for (; i < n; ++i) out[i] = op_abs(a[i]);
}

void sign_avx2(const double* a, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d minus_one = _mm256_set1_pd(-1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = load(a + i);
        __m256d pos = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), one);
        __m256d negv = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_LT_OQ), minus_one);
        store(out + i, _mm256_or_pd(pos, negv));
    }
    for (; i < n; ++i) out[i] = op_sign(a[i]);
}

void sqrt_avx2(const double* a, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(out + i, _mm256_sqrt_pd(load(a + i)));
    for (; i < n; ++i) out[i] = op_sqrt(a[i]);
}

#define SG_UNARY_LIBM(NAME, SCALAROP)                              \
    void NAME(const double* a, double* out, std::size_t n) {       \
        for (std::size_t i = 0; i < n; ++i) out[i] = SCALAROP(a[i]); \
    }

SG_UNARY_LIBM(sin_avx2, op_sin)
SG_UNARY_LIBM(cos_avx2, op_cos)
SG_UNARY_LIBM(tan_avx2, op_tan)
SG_UNARY_LIBM(exp_avx2, op_exp)
SG_UNARY_LIBM(ln_avx2, op_ln)
SG_UNARY_LIBM(tanh_avx2, op_tanh)

#undef SG_UNARY_LIBM

void fill_avx2(double value, double* out, std::size_t n) {
    const __m256d v = _mm256_set1_pd(value);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(out + i, v);
    for (; i < n; ++i) out[i] = value;
}

void copy_avx2(const double* a, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(out + i, load(a + i));
    for (; i < n; ++i) out[i] = a[i];
}

void axpy_avx2(double a, const double* x, const double* k, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        store(out + i, _mm256_add_pd(load(x + i), _mm256_mul_pd(va, load(k + i))));
    }
    for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine_avx2(double h, const double* x, const double* k1, const double* k2,
                      const double* k3, const double* k4, double* out, std::size_t n) {
    const double w = h / 6.0;
    const __m256d vw = _mm256_set1_pd(w);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // Same association as the scalar loop: ((k1 + 2*k2) + 2*k3) + k4.
        __m256d acc = _mm256_add_pd(load(k1 + i), _mm256_mul_pd(two, load(k2 + i)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(two, load(k3 + i)));
        acc = _mm256_add_pd(acc, load(k4 + i));
        store(out + i, _mm256_add_pd(load(x + i), _mm256_mul_pd(vw, acc)));
    }
    for (; i < n; ++i) {
        out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table = {
        "avx2",
        add_avx2,
        sub_avx2,
        mul_avx2,
        div_avx2,
        pow_avx2,
        min_avx2,
        max_avx2,
        neg_avx2,
        abs_avx2,
        sign_avx2,
        sqrt_avx2,
        sin_avx2,
        cos_avx2,
        tan_avx2,
        exp_avx2,
        ln_avx2,
        tanh_avx2,
        fill_avx2,
        copy_avx2,
        axpy_avx2,
        rk4_combine_avx2,
    };
    return table;
}

}  // namespace smallgain::kernels

#endif  // x86_64
