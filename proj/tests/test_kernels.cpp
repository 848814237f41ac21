#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "smallgain/kernels.hpp"

using namespace smallgain;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed, bool nonneg = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(nonneg ? 0.0 : -50.0, 50.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    // Sprinkle in the awkward values.
    if (n > 6) {
        v[1] = 0.0;
        v[2] = -0.0;
        v[3] = 1e-308;
        v[4] = nonneg ? 1e12 : -1e12;
    }
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("scalar and AVX2 backends agree bitwise on every kernel") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 unavailable on this CPU; cross-backend test skipped");
        return;
    }
    const kernels::KernelTable& sc = kernels::scalar_table();
    const kernels::KernelTable& vx = kernels::avx2_table();

    // Odd lengths exercise the remainder loops.
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u}) {
        CAPTURE(n);
        std::vector<double> a = random_values(n, 11 * n + 1);
        std::vector<double> b = random_values(n, 13 * n + 5);
        std::vector<double> pos = random_values(n, 17 * n + 9, true);
        std::vector<double> r1(n), r2(n);

        auto check_binary = [&](kernels::BinaryKernel f, kernels::BinaryKernel g,
                                const std::vector<double>& x, const std::vector<double>& y) {
            f(x.data(), y.data(), r1.data(), n);
            g(x.data(), y.data(), r2.data(), n);
            CHECK(bitwise_equal(r1, r2));
        };
        check_binary(sc.add, vx.add, a, b);
        check_binary(sc.sub, vx.sub, a, b);
        check_binary(sc.mul, vx.mul, a, b);
        check_binary(sc.div, vx.div, a, b);
        check_binary(sc.min, vx.min, a, b);
        check_binary(sc.max, vx.max, a, b);
        check_binary(sc.pow, vx.pow, pos, b);

        auto check_unary = [&](kernels::UnaryKernel f, kernels::UnaryKernel g,
                               const std::vector<double>& x) {
            f(x.data(), r1.data(), n);
            g(x.data(), r2.data(), n);
            CHECK(bitwise_equal(r1, r2));
        };
        check_unary(sc.neg, vx.neg, a);
        check_unary(sc.abs, vx.abs, a);
        check_unary(sc.sign, vx.sign, a);
        check_unary(sc.sqrt, vx.sqrt, pos);
        check_unary(sc.sin, vx.sin, a);
        check_unary(sc.cos, vx.cos, a);
        check_unary(sc.tan, vx.tan, a);
        check_unary(sc.exp, vx.exp, a);
        check_unary(sc.ln, vx.ln, pos);
        check_unary(sc.tanh, vx.tanh, a);

        sc.fill(3.25, r1.data(), n);
        vx.fill(3.25, r2.data(), n);
        CHECK(bitwise_equal(r1, r2));
        sc.copy(a.data(), r1.data(), n);
        vx.copy(a.data(), r2.data(), n);
        CHECK(bitwise_equal(r1, r2));
        sc.axpy(0.0005, a.data(), b.data(), r1.data(), n);
        vx.axpy(0.0005, a.data(), b.data(), r2.data(), n);
        CHECK(bitwise_equal(r1, r2));

        std::vector<double> k2 = random_values(n, 19 * n + 3);
        std::vector<double> k3 = random_values(n, 23 * n + 7);
        sc.rk4_combine(1e-3, a.data(), b.data(), k2.data(), k3.data(), pos.data(), r1.data(),
                       n);
        vx.rk4_combine(1e-3, a.data(), b.data(), k2.data(), k3.data(), pos.data(), r2.data(),
                       n);
        CHECK(bitwise_equal(r1, r2));
    }
}

TEST_CASE("min/max follow the vector convention, sign(0) is 0") {
    const kernels::KernelTable& sc = kernels::scalar_table();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> a = {1.0, nan, 0.0, -0.0};
    std::vector<double> b = {2.0, 2.0, -0.0, 0.0};
    std::vector<double> r(4);
    sc.min(a.data(), b.data(), r.data(), 4);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 2.0);  // NaN in the first operand yields the second
    CHECK(std::bit_cast<std::uint64_t>(r[2]) == std::bit_cast<std::uint64_t>(-0.0));
    sc.max(a.data(), b.data(), r.data(), 4);
    CHECK(r[0] == 2.0);
    CHECK(r[1] == 2.0);

    std::vector<double> s = {-3.0, 0.0, 5.0, nan};
    sc.sign(s.data(), r.data(), 4);
    CHECK(r[0] == -1.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 1.0);
    CHECK(r[3] == 0.0);
}

TEST_CASE("runtime dispatch honors forced backends") {
    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    CHECK(std::string(kernels::active().name) == "scalar");
    if (kernels::avx2_available()) {
        kernels::force_backend(kernels::Backend::Avx2);
        CHECK(kernels::active_backend() == kernels::Backend::Avx2);
        CHECK(std::string(kernels::active().name) == "avx2");
    }
    kernels::reset_backend();
    if (kernels::avx2_available()) {
        CHECK(kernels::active_backend() == kernels::Backend::Avx2);
    }
}

TEST_CASE("domain masks") {
    std::vector<double> v = {1.0, -2.0, 0.0, std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::uint8_t> mask(4, 0);
    kernels::mask_negative(v.data(), mask.data(), 4);
    CHECK(mask == std::vector<std::uint8_t>{0, 1, 0, 0});
    std::fill(mask.begin(), mask.end(), 0);
    kernels::mask_zero(v.data(), mask.data(), 4);
    CHECK(mask == std::vector<std::uint8_t>{0, 0, 1, 0});
    std::fill(mask.begin(), mask.end(), 0);
    kernels::mask_nan(v.data(), mask.data(), 4);
    CHECK(mask == std::vector<std::uint8_t>{0, 0, 0, 1});
}
