#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "smallgain/comparison.hpp"
#include "smallgain/regions.hpp"

namespace smallgain {

/// Axis-aligned box, one (lo, hi) pair per coordinate.
using Box = std::vector<std::pair<double, double>>;

/// Variable schemas follow a global naming convention: states x1..xn with
/// subsystem 1 owning x1..x_{n1}, inputs u1..um with subsystem 1 owning
/// u1..u_{m1}, plus time t in the vector fields.
std::vector<std::string> state_names(std::size_t n);
std::vector<std::string> field_schema(std::size_t n, std::size_t m_lo, std::size_t m_hi);
std::vector<std::string> storage_schema(std::size_t offset, std::size_t dim);

/// One density-propagation certificate: a positive density rho and a rate q
/// on a box approximating the open set the certificate lives on.
struct DpiBlock {
    std::size_t k = 0;          // region index (gap between B_{k-1} and A_k)
    Expr rho;                   // over the full state, positive on the box
    Expr q;                     // over the full state, >= 0 and > 0 a.e.
    ComparisonFn gamma_k;       // class-K input trigger
    Box domain_box;             // n entries

    DpiBlock(std::size_t k, Expr rho, Expr q, ComparisonFn gamma_k, Box domain_box);

    const Program& rho_program() const { return rho_program_; }
    const Program& q_program() const { return q_program_; }

private:
    Program rho_program_;
    Program q_program_;
};

/// Complete problem description of the feedback interconnection
/// dx_i/dt = f_i(x1, x2, u_i).
class InterconnectionSpec {
public:
    InterconnectionSpec(std::size_t n1, std::size_t n2, std::size_t m1, std::size_t m2,
                        std::vector<Expr> f1, std::vector<Expr> f2, StorageFn v1,
                        StorageFn v2, ComparisonFn gamma12, ComparisonFn gamma21,
                        ComparisonFn gamma1, ComparisonFn gamma2, ComparisonFn alpha1,
                        ComparisonFn alpha2, std::vector<DpiBlock> dpi_blocks);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    std::size_t n() const { return n1_ + n2_; }
    std::size_t m1() const { return m1_; }
    std::size_t m2() const { return m2_; }
    std::size_t m() const { return m1_ + m2_; }

    const std::vector<Expr>& f1() const { return f1_; }
    const std::vector<Expr>& f2() const { return f2_; }
    const std::vector<Program>& f1_programs() const { return f1_programs_; }
    const std::vector<Program>& f2_programs() const { return f2_programs_; }

    /// Program of full-state component j (f1 for j < n1, else f2).
    const Program& field_program(std::size_t j) const;
    /// True when component j belongs to subsystem 1.
    bool component_in_first(std::size_t j) const { return j < n1_; }

    const StorageFn& v1() const { return v1_; }
    const StorageFn& v2() const { return v2_; }
    const ComparisonFn& gamma12() const { return gamma12_; }
    const ComparisonFn& gamma21() const { return gamma21_; }
    const ComparisonFn& gamma1() const { return gamma1_; }
    const ComparisonFn& gamma2() const { return gamma2_; }
    const ComparisonFn& alpha1() const { return alpha1_; }
    const ComparisonFn& alpha2() const { return alpha2_; }
    const std::vector<DpiBlock>& dpi_blocks() const { return dpi_blocks_; }

    /// |f(0,0,0)| componentwise; the origin must be an equilibrium within 1e-9.
    double origin_residual() const;

private:
    std::size_t n1_, n2_, m1_, m2_;
    std::vector<Expr> f1_, f2_;
    std::vector<Program> f1_programs_, f2_programs_;
    StorageFn v1_, v2_;
    ComparisonFn gamma12_, gamma21_, gamma1_, gamma2_, alpha1_, alpha2_;
    std::vector<DpiBlock> dpi_blocks_;
};

}  // namespace smallgain
