#include <cmath>

#include "smallgain/detail/scalar_ops.hpp"
#include "smallgain/kernels.hpp"

// Reference backend. Every kernel is a plain loop over the canonical
// per-element ops; the AVX2 backend must match this bitwise.

namespace smallgain::kernels {

namespace {

using namespace smallgain::detail;

template <double (*Op)(double, double)>
void binary_loop(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = Op(a[i], b[i]);
}

template <double (*Op)(double)>
void unary_loop(const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = Op(a[i]);
}

void fill_loop(double value, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = value;
}

void copy_loop(const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i];
}

void axpy_loop(double a, const double* x, const double* k, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine_loop(double h, const double* x, const double* k1, const double* k2,
                      const double* k3, const double* k4, double* out, std::size_t n) {
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table = {
        "scalar",
        binary_loop<op_add>,
        binary_loop<op_sub>,
        binary_loop<op_mul>,
        binary_loop<op_div>,
        binary_loop<op_pow>,
        binary_loop<op_min>,
        binary_loop<op_max>,
        unary_loop<op_neg>,
        unary_loop<op_abs>,
        unary_loop<op_sign>,
        unary_loop<op_sqrt>,
        unary_loop<op_sin>,
        unary_loop<op_cos>,
        unary_loop<op_tan>,
        unary_loop<op_exp>,
        unary_loop<op_ln>,
        unary_loop<op_tanh>,
        fill_loop,
        copy_loop,
        axpy_loop,
        rk4_combine_loop,
    };
    return table;
}

void mask_negative(const double* a, std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < 0.0) mask[i] = 1;
    }
}

void mask_zero(const double* a, std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) mask[i] = 1;
    }
}

void mask_nan(const double* a, std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(a[i])) mask[i] = 1;
    }
}

}  // namespace smallgain::kernels
