#include "smallgain/program.hpp"

#include <cmath>

#include "smallgain/errors.hpp"
#include "smallgain/kernels.hpp"

namespace smallgain {

Program::Program(const Expr& expr) {
    num_vars_ = expr.variables().size();
    result_slot_ = compile(expr.nodes(), expr.root());
}

std::uint16_t Program::alloc_reg() {
    if (!free_regs_.empty()) {
        std::uint16_t r = free_regs_.back();
        free_regs_.pop_back();
        return r;
    }
    std::uint16_t slot = static_cast<std::uint16_t>(num_vars_ + num_regs_);
    ++num_regs_;
    return slot;
}

void Program::release(std::uint16_t slot) {
    if (slot >= num_vars_) free_regs_.push_back(slot);
}

std::uint16_t Program::compile(const std::vector<Node>& nodes, std::uint32_t idx) {
    const Node& n = nodes[idx];
    switch (n.kind) {
        case Node::Kind::Number: {
            std::uint16_t dst = alloc_reg();
            code_.push_back({OpCode::Fill, dst, 0, 0, 0, n.number});
            return dst;
        }
        case Node::Kind::Var:
            return static_cast<std::uint16_t>(n.var);
        case Node::Kind::Unary: {
            std::uint16_t a = compile(nodes, n.lhs);
            release(a);
            std::uint16_t dst = alloc_reg();
            code_.push_back({OpCode::Neg, dst, a, 0, 0, 0.0});
            return dst;
        }
        case Node::Kind::Binary: {
            std::uint16_t a = compile(nodes, n.lhs);
            std::uint16_t b = compile(nodes, n.rhs);
            release(a);
            release(b);
            std::uint16_t dst = alloc_reg();
            OpCode op = OpCode::Add;
            switch (n.bop) {
                case BinaryOp::Add: op = OpCode::Add; break;
                case BinaryOp::Sub: op = OpCode::Sub; break;
                case BinaryOp::Mul: op = OpCode::Mul; break;
                case BinaryOp::Div: {
                    std::uint32_t c = static_cast<std::uint32_t>(check_info_.size());
                    check_info_.push_back({"division by zero", n.pos});
                    code_.push_back({OpCode::CheckZero, 0, b, 0, c, 0.0});
                    op = OpCode::Div;
                    break;
                }
                case BinaryOp::Pow: op = OpCode::Pow; break;
            }
            code_.push_back({op, dst, a, b, 0, 0.0});
            if (n.bop == BinaryOp::Pow) {
                std::uint32_t c = static_cast<std::uint32_t>(check_info_.size());
                check_info_.push_back({"pow", n.pos});
                code_.push_back({OpCode::CheckNan, 0, dst, 0, c, 0.0});
            }
            return dst;
        }
        case Node::Kind::Call: {
            std::uint16_t a = compile(nodes, n.lhs);
            std::uint16_t b = 0;
            const bool two_args = builtin_arity(n.fn) == 2;
            if (two_args) b = compile(nodes, n.rhs);
            release(a);
            if (two_args) release(b);
            std::uint16_t dst = alloc_reg();
            OpCode op = OpCode::Sin;
            switch (n.fn) {
                case Builtin::Sin: op = OpCode::Sin; break;
                case Builtin::Cos: op = OpCode::Cos; break;
                case Builtin::Tan: op = OpCode::Tan; break;
                case Builtin::Exp: op = OpCode::Exp; break;
                case Builtin::Tanh: op = OpCode::Tanh; break;
                case Builtin::Abs: op = OpCode::Abs; break;
                case Builtin::Sign: op = OpCode::Sign; break;
                case Builtin::Min: op = OpCode::Min; break;
                case Builtin::Max: op = OpCode::Max; break;
                case Builtin::Ln: {
                    std::uint32_t c = static_cast<std::uint32_t>(check_info_.size());
                    check_info_.push_back({"ln", n.pos});
                    code_.push_back({OpCode::CheckNegative, 0, a, 0, c, 0.0});
                    op = OpCode::Ln;
                    break;
                }
                case Builtin::Sqrt: {
                    std::uint32_t c = static_cast<std::uint32_t>(check_info_.size());
                    check_info_.push_back({"sqrt", n.pos});
                    code_.push_back({OpCode::CheckNegative, 0, a, 0, c, 0.0});
                    op = OpCode::Sqrt;
                    break;
                }
            }
            code_.push_back({op, dst, a, b, 0, 0.0});
            return dst;
        }
    }
    throw Error("corrupt expression node");
}

void Program::eval(std::span<const double* const> var_data, std::size_t n, double* out,
                   Workspace& ws, std::uint8_t* domain_mask) const {
    if (var_data.size() != num_vars_) {
        throw DimensionMismatchError(num_vars_, var_data.size());
    }
    const auto& k = kernels::active();
    double* scratch = ws.ensure(num_regs_ == 0 ? 1 : num_regs_, n);

    auto ptr = [&](std::uint16_t slot) -> const double* {
        return slot < num_vars_ ? var_data[slot]
                                : scratch + static_cast<std::size_t>(slot - num_vars_) * n;
    };
    auto wptr = [&](std::uint16_t slot) -> double* {
        return scratch + static_cast<std::size_t>(slot - num_vars_) * n;
    };

    for (const Instr& ins : code_) {
        switch (ins.op) {
            case OpCode::Fill: k.fill(ins.imm, wptr(ins.dst), n); break;
            case OpCode::Copy: k.copy(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Add: k.add(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Sub: k.sub(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Mul: k.mul(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Div: k.div(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Pow: k.pow(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Min: k.min(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Max: k.max(ptr(ins.a), ptr(ins.b), wptr(ins.dst), n); break;
            case OpCode::Neg: k.neg(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Abs: k.abs(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Sign: k.sign(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Sqrt: k.sqrt(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Sin: k.sin(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Cos: k.cos(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Tan: k.tan(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Exp: k.exp(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Ln: k.ln(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::Tanh: k.tanh(ptr(ins.a), wptr(ins.dst), n); break;
            case OpCode::CheckNegative: {
                const double* a = ptr(ins.a);
                if (domain_mask != nullptr) {
                    kernels::mask_negative(a, domain_mask, n);
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        if (a[i] < 0.0) {
                            const CheckInfo& info = check_info_[ins.check];
                            throw DomainError(info.what, info.pos);
                        }
                    }
                }
                break;
            }
            case OpCode::CheckZero: {
                const double* a = ptr(ins.a);
                if (domain_mask != nullptr) {
                    kernels::mask_zero(a, domain_mask, n);
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        if (a[i] == 0.0) {
                            const CheckInfo& info = check_info_[ins.check];
                            throw DomainError(info.what, info.pos);
                        }
                    }
                }
                break;
            }
            case OpCode::CheckNan: {
                const double* a = ptr(ins.a);
                if (domain_mask != nullptr) {
                    kernels::mask_nan(a, domain_mask, n);
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        if (std::isnan(a[i])) {
                            const CheckInfo& info = check_info_[ins.check];
                            throw DomainError(info.what, info.pos);
                        }
                    }
                }
                break;
            }
        }
    }
    k.copy(ptr(result_slot_), out, n);
}

double Program::eval1(std::span<const double> values) const {
    static thread_local Workspace ws;
    static thread_local std::vector<const double*> ptrs;
    ptrs.resize(num_vars_);
    for (std::size_t i = 0; i < num_vars_; ++i) ptrs[i] = &values[i];
    double out = 0.0;
    eval(ptrs, 1, &out, ws);
    return out;
}

}  // namespace smallgain
