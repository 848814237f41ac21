#pragma once

#include <cmath>

// Canonical per-element semantics shared by the reference tree evaluator and
// the scalar kernel backend. The AVX2 backend reproduces these exactly:
// min/max use the SSE/AVX convention (second operand returned on ties and
// NaNs), sign(0) = 0, and transcendentals go through the same libm calls in
// every backend, so dispatch never changes results.

namespace smallgain::detail {

inline double op_add(double a, double b) { return a + b; }
inline double op_sub(double a, double b) { return a - b; }
inline double op_mul(double a, double b) { return a * b; }
inline double op_div(double a, double b) { return a / b; }
inline double op_pow(double a, double b) { return std::pow(a, b); }
inline double op_min(double a, double b) { return a < b ? a : b; }
inline double op_max(double a, double b) { return a > b ? a : b; }

inline double op_neg(double x) { return -x; }
inline double op_abs(double x) { return std::fabs(x); }
inline double op_sqrt(double x) { return std::sqrt(x); }
inline double op_sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline double op_sin(double x) { return std::sin(x); }
inline double op_cos(double x) { return std::cos(x); }
inline double op_tan(double x) { return std::tan(x); }
inline double op_exp(double x) { return std::exp(x); }
inline double op_ln(double x) { return std::log(x); }
inline double op_tanh(double x) { return std::tanh(x); }

}  // namespace smallgain::detail
