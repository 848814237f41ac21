#include "smallgain/system.hpp"

#include <cmath>

namespace smallgain {

std::vector<std::string> state_names(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

std::vector<std::string> field_schema(std::size_t n, std::size_t m_lo, std::size_t m_hi) {
    std::vector<std::string> names = state_names(n);
    for (std::size_t i = m_lo; i < m_hi; ++i) names.push_back("u" + std::to_string(i + 1));
    names.push_back("t");
    return names;
}

std::vector<std::string> storage_schema(std::size_t offset, std::size_t dim) {
    std::vector<std::string> names;
    names.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        names.push_back("x" + std::to_string(offset + i + 1));
    }
    return names;
}

namespace {

void require_schema(const Expr& e, const std::vector<std::string>& expected,
                    const std::string& what) {
    if (e.variables() != expected) {
        throw Error(what + " must be declared over the schema it was parsed with");
    }
}

}  // namespace

DpiBlock::DpiBlock(std::size_t k_, Expr rho_, Expr q_, ComparisonFn gamma_k_, Box box)
    : k(k_), rho(std::move(rho_)), q(std::move(q_)), gamma_k(std::move(gamma_k_)),
      domain_box(std::move(box)), rho_program_(rho), q_program_(q) {
    if (k == 0) throw Error("dpi block index k is 1-based");
    if (rho.variables() != q.variables()) {
        throw Error("dpi rho and q must share the full-state schema");
    }
    if (domain_box.size() != rho.variables().size()) {
        throw DimensionMismatchError(rho.variables().size(), domain_box.size());
    }
    for (const auto& [lo, hi] : domain_box) {
        if (!(lo < hi)) throw Error("dpi domain box needs lo < hi on every axis");
    }
}

InterconnectionSpec::InterconnectionSpec(
    std::size_t n1, std::size_t n2, std::size_t m1, std::size_t m2, std::vector<Expr> f1,
    std::vector<Expr> f2, StorageFn v1, StorageFn v2, ComparisonFn gamma12,
    ComparisonFn gamma21, ComparisonFn gamma1, ComparisonFn gamma2, ComparisonFn alpha1,
    ComparisonFn alpha2, std::vector<DpiBlock> dpi_blocks)
    : n1_(n1), n2_(n2), m1_(m1), m2_(m2), f1_(std::move(f1)), f2_(std::move(f2)),
      v1_(std::move(v1)), v2_(std::move(v2)), gamma12_(std::move(gamma12)),
      gamma21_(std::move(gamma21)), gamma1_(std::move(gamma1)), gamma2_(std::move(gamma2)),
      alpha1_(std::move(alpha1)), alpha2_(std::move(alpha2)),
      dpi_blocks_(std::move(dpi_blocks)) {
    if (n1_ == 0 || n2_ == 0) throw Error("subsystem state dimensions must be positive");
    if (f1_.size() != n1_) throw DimensionMismatchError(n1_, f1_.size());
    if (f2_.size() != n2_) throw DimensionMismatchError(n2_, f2_.size());

    const auto schema1 = field_schema(n(), 0, m1_);
    const auto schema2 = field_schema(n(), m1_, m());
    for (const Expr& e : f1_) require_schema(e, schema1, "f1 component");
    for (const Expr& e : f2_) require_schema(e, schema2, "f2 component");
    require_schema(v1_.body(), storage_schema(0, n1_), "v1");
    require_schema(v2_.body(), storage_schema(n1_, n2_), "v2");
    const auto full = state_names(n());
    for (const DpiBlock& b : dpi_blocks_) {
        require_schema(b.rho, full, "dpi rho");
    }

    f1_programs_.reserve(f1_.size());
    for (const Expr& e : f1_) f1_programs_.emplace_back(e);
    f2_programs_.reserve(f2_.size());
    for (const Expr& e : f2_) f2_programs_.emplace_back(e);

    if (origin_residual() > 1e-9) {
        throw Error("vector field must vanish at the origin (f(0,0,0) = 0)");
    }
}

const Program& InterconnectionSpec::field_program(std::size_t j) const {
    return j < n1_ ? f1_programs_[j] : f2_programs_[j - n1_];
}

double InterconnectionSpec::origin_residual() const {
    double worst = 0.0;
    std::vector<double> args1(n() + m1_ + 1, 0.0);
    for (const Expr& e : f1_) {
        worst = std::max(worst, std::fabs(e.eval(std::span<const double>(args1))));
    }
    std::vector<double> args2(n() + m2_ + 1, 0.0);
    for (const Expr& e : f2_) {
        worst = std::max(worst, std::fabs(e.eval(std::span<const double>(args2))));
    }
    return worst;
}

}  // namespace smallgain
