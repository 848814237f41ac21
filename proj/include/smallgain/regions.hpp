#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smallgain/comparison.hpp"
#include "smallgain/intervals.hpp"

namespace smallgain {

/// Storage function of one subsystem, an expression over its state variables.
class StorageFn {
public:
    StorageFn(Expr body, std::size_t dim);

    double operator()(std::span<const double> x) const;

    const Expr& body() const { return body_; }
    const Program& program() const { return program_; }
    std::size_t dim() const { return dim_; }

private:
    Expr body_;
    Program program_;
    std::size_t dim_;
};

struct StorageValidation {
    bool passed = false;
    bool zero_at_zero_ok = false;
    double v_at_zero = 0.0;
    std::vector<std::vector<double>> nonpositive_points;  // sampled x != 0 with V(x) <= 0
};

/// Sample-based positive-definiteness check on a box (grid corners plus
/// seeded random points). Never a proof.
StorageValidation validate_storage(const StorageFn& v,
                                   std::span<const std::pair<double, double>> box,
                                   std::size_t samples, std::uint64_t seed);

/// x in L(delta) = {V(x) <= delta}; level sets are closed.
bool level_set_contains(const StorageFn& v, double delta, std::span<const double> x);

/// Which reading of the inner composition in the A_k threshold to use:
/// the text as printed (gamma21 o gamma21) or the alternative
/// gamma21 o gamma12.
enum class InnerComposition { AsPrinted, Gamma21Gamma12 };

/// Level thresholds defining A_k (inner) and B_k (outer). b_infinite marks an
/// interval with infinite upper endpoint, where B_k is the whole state space.
struct RegionSpec {
    std::size_t k = 0;  // 1-based interval index
    double a_threshold_v1 = 0.0;
    double a_threshold_v2 = 0.0;
    double b_threshold_v1 = 0.0;
    double b_threshold_v2 = 0.0;
    bool b_infinite = false;
};

RegionSpec build_region(std::size_t k, const SmallGainIntervals& intervals,
                        const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                        InnerComposition comp = InnerComposition::AsPrinted);

/// Membership of the full state x = (x1, x2) in A_k / B_k.
bool in_a_region(const RegionSpec& region, const StorageFn& v1, const StorageFn& v2,
                 std::span<const double> x);
bool in_b_region(const RegionSpec& region, const StorageFn& v1, const StorageFn& v2,
                 std::span<const double> x);

/// Composite storage function V(x) = max{sigma(V1(x1)), V2(x2)}.
class CompositeV {
public:
    CompositeV(SigmaFn sigma, StorageFn v1, StorageFn v2);

    double operator()(std::span<const double> x) const;

    const SigmaFn& sigma() const { return sigma_; }
    const StorageFn& v1() const { return v1_; }
    const StorageFn& v2() const { return v2_; }
    std::size_t dim() const { return v1_.dim() + v2_.dim(); }

private:
    SigmaFn sigma_;
    StorageFn v1_;
    StorageFn v2_;
};

double composite_v(const CompositeV& cv, std::span<const double> x);

/// The partition from the convergence argument: A where V2 < sigma(V1),
/// B where V2 > sigma(V1), Gamma inside the tolerance band around equality.
enum class RegionLabel { A, B, Gamma };

RegionLabel classify_abgamma(const CompositeV& cv, std::span<const double> x, double tol);

}  // namespace smallgain
