#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smallgain/expr.hpp"

namespace smallgain {

/// Scratch buffers reused across Program evaluations. One per thread.
class Workspace {
public:
    double* ensure(std::size_t regs, std::size_t n) {
        if (scratch_.size() < regs * n) scratch_.resize(regs * n);
        return scratch_.data();
    }

private:
    std::vector<double> scratch_;
};

/// An Expr compiled to a flat register tape executed over batches of points
/// with the dispatched kernels (structure-of-arrays: one input array per
/// schema variable).
///
/// Per-element results are bitwise identical to Expr::eval, whichever kernel
/// backend is active.
class Program {
public:
    explicit Program(const Expr& expr);

    std::size_t num_vars() const { return num_vars_; }
    std::size_t num_regs() const { return num_regs_; }

    /// Evaluate over `n` points. var_data holds one pointer per schema
    /// variable, each to n values. When `domain_mask` is null, the first
    /// domain violation throws DomainError; otherwise violations set the
    /// corresponding mask byte to 1 and evaluation continues (lanes already
    /// flagged keep whatever IEEE value propagates).
    void eval(std::span<const double* const> var_data, std::size_t n, double* out,
              Workspace& ws, std::uint8_t* domain_mask = nullptr) const;

    /// Single-point evaluation through the same tape (thread-local scratch).
    double eval1(std::span<const double> values) const;

private:
    enum class OpCode : std::uint8_t {
        Fill, Copy,
        Add, Sub, Mul, Div, Pow, Min, Max,
        Neg, Abs, Sign, Sqrt, Sin, Cos, Tan, Exp, Ln, Tanh,
        CheckNegative,  // flag lanes where slot a < 0
        CheckZero,      // flag lanes where slot a == 0
        CheckNan,       // flag lanes where slot a is NaN
    };

    struct Instr {
        OpCode op;
        std::uint16_t dst = 0;   // slot index (vars first, then registers)
        std::uint16_t a = 0;
        std::uint16_t b = 0;
        std::uint32_t check = 0; // index into check_info_ for Check* ops
        double imm = 0.0;        // Fill value
    };

    struct CheckInfo {
        std::string what;
        std::uint32_t pos;
    };

    std::uint16_t compile(const std::vector<Node>& nodes, std::uint32_t idx);
    std::uint16_t alloc_reg();
    void release(std::uint16_t slot);

    std::vector<Instr> code_;
    std::vector<CheckInfo> check_info_;
    std::vector<std::uint16_t> free_regs_;
    std::size_t num_vars_ = 0;
    std::size_t num_regs_ = 0;
    std::uint16_t result_slot_ = 0;
};

}  // namespace smallgain
