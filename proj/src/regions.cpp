#include "smallgain/regions.hpp"

#include <cmath>
#include <random>

namespace smallgain {

StorageFn::StorageFn(Expr body, std::size_t dim)
    : body_(std::move(body)), program_(body_), dim_(dim) {
    if (body_.variables().size() != dim_) {
        throw DimensionMismatchError(dim_, body_.variables().size());
    }
    if (dim_ == 0) throw Error("storage function needs at least one state variable");
}

double StorageFn::operator()(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionMismatchError(dim_, x.size());
    return program_.eval1(x);
}

StorageValidation validate_storage(const StorageFn& v,
                                   std::span<const std::pair<double, double>> box,
                                   std::size_t samples, std::uint64_t seed) {
    if (box.size() != v.dim()) throw DimensionMismatchError(v.dim(), box.size());
    StorageValidation out;

    std::vector<double> zero(v.dim(), 0.0);
    out.v_at_zero = v(zero);
    out.zero_at_zero_ok = std::fabs(out.v_at_zero) <= 1e-9;

    std::mt19937_64 rng(seed);
    std::vector<double> x(v.dim());
    auto check_point = [&](std::span<const double> p) {
        double norm2 = 0.0;
        for (double c : p) norm2 += c * c;
        if (norm2 == 0.0) return;
        if (!(v(p) > 0.0)) {
            out.nonpositive_points.emplace_back(p.begin(), p.end());
        }
    };

    // Box corners first, then random interior points.
    const std::size_t corners = std::size_t{1} << v.dim();
    if (v.dim() <= 16) {
        for (std::size_t c = 0; c < corners; ++c) {
            for (std::size_t i = 0; i < v.dim(); ++i) {
                x[i] = (c >> i) & 1 ? box[i].second : box[i].first;
            }
            check_point(x);
        }
    }
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < v.dim(); ++i) {
            std::uniform_real_distribution<double> dist(box[i].first, box[i].second);
            x[i] = dist(rng);
        }
        check_point(x);
    }

    out.passed = out.zero_at_zero_ok && out.nonpositive_points.empty();
    return out;
}

bool level_set_contains(const StorageFn& v, double delta, std::span<const double> x) {
    if (x.size() != v.dim()) throw DimensionMismatchError(v.dim(), x.size());
    if (std::isinf(delta)) return true;
    return v(x) <= delta;
}

RegionSpec build_region(std::size_t k, const SmallGainIntervals& intervals,
                        const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                        InnerComposition comp) {
    if (k == 0 || k > intervals.ell()) {
        throw Error("build_region: interval index out of range");
    }
    const SmallGainInterval& interval = intervals.intervals[k - 1];

    RegionSpec region;
    region.k = k;
    const double m_lo = interval.lower;
    region.a_threshold_v1 = std::max(m_lo, gamma12(m_lo));
    const double g21 = gamma21(m_lo);
    const double inner = comp == InnerComposition::AsPrinted ? gamma21(g21)
                                                             : gamma21(gamma12(m_lo));
    region.a_threshold_v2 = std::max(g21, inner);

    if (interval.upper_infinite()) {
        region.b_infinite = true;
        region.b_threshold_v1 = std::numeric_limits<double>::infinity();
        region.b_threshold_v2 = std::numeric_limits<double>::infinity();
    } else {
        region.b_threshold_v1 = interval.upper;
        region.b_threshold_v2 = gamma21(interval.upper);
    }
    return region;
}

namespace {

void split_state(std::span<const double> x, const StorageFn& v1, const StorageFn& v2,
                 std::span<const double>& x1, std::span<const double>& x2) {
    if (x.size() != v1.dim() + v2.dim()) {
        throw DimensionMismatchError(v1.dim() + v2.dim(), x.size());
    }
    x1 = x.subspan(0, v1.dim());
    x2 = x.subspan(v1.dim());
}

}  // namespace

bool in_a_region(const RegionSpec& region, const StorageFn& v1, const StorageFn& v2,
                 std::span<const double> x) {
    std::span<const double> x1, x2;
    split_state(x, v1, v2, x1, x2);
    return level_set_contains(v1, region.a_threshold_v1, x1) &&
           level_set_contains(v2, region.a_threshold_v2, x2);
}

bool in_b_region(const RegionSpec& region, const StorageFn& v1, const StorageFn& v2,
                 std::span<const double> x) {
    if (region.b_infinite) return true;
    std::span<const double> x1, x2;
    split_state(x, v1, v2, x1, x2);
    return level_set_contains(v1, region.b_threshold_v1, x1) &&
           level_set_contains(v2, region.b_threshold_v2, x2);
}

CompositeV::CompositeV(SigmaFn sigma, StorageFn v1, StorageFn v2)
    : sigma_(std::move(sigma)), v1_(std::move(v1)), v2_(std::move(v2)) {}

double CompositeV::operator()(std::span<const double> x) const {
    std::span<const double> x1, x2;
    split_state(x, v1_, v2_, x1, x2);
    return std::max(sigma_(v1_(x1)), v2_(x2));
}

double composite_v(const CompositeV& cv, std::span<const double> x) { return cv(x); }

RegionLabel classify_abgamma(const CompositeV& cv, std::span<const double> x, double tol) {
    std::span<const double> x1, x2;
    split_state(x, cv.v1(), cv.v2(), x1, x2);
    const double sv1 = cv.sigma()(cv.v1()(x1));
    const double v2 = cv.v2()(x2);
    const double band = tol * std::max({1.0, std::fabs(sv1), std::fabs(v2)});
    if (v2 < sv1 - band) return RegionLabel::A;
    if (v2 > sv1 + band) return RegionLabel::B;
    return RegionLabel::Gamma;
}

}  // namespace smallgain
