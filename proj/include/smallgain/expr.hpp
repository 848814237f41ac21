#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smallgain/errors.hpp"

namespace smallgain {

enum class UnaryOp : std::uint8_t { Neg };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

enum class Builtin : std::uint8_t {
    Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Min, Max, Tanh, Sign
};

/// Arity of a builtin (min/max take two arguments, the rest one).
int builtin_arity(Builtin fn);
const char* builtin_name(Builtin fn);

struct Node {
    enum class Kind : std::uint8_t { Number, Var, Unary, Binary, Call };
    Kind kind = Kind::Number;
    double number = 0.0;          // Kind::Number
    std::uint32_t var = 0;        // Kind::Var: index into the schema
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    Builtin fn = Builtin::Sin;
    std::uint32_t lhs = 0;        // unary child / binary lhs / call arg 0
    std::uint32_t rhs = 0;        // binary rhs / call arg 1
    std::uint32_t pos = 0;        // source offset, kept for diagnostics
};

/// Variable bindings for scalar evaluation.
using Env = std::map<std::string, double>;

/// Parsed scalar math expression over a declared variable schema.
///
/// Immutable after parse; evaluation is pure and safe to call from many
/// threads concurrently.
class Expr {
public:
    /// Parse `text` over the given schema. The schema order defines the
    /// variable indices used by positional evaluation.
    /// Throws SyntaxError, UnknownIdentifierError, ArityError.
    static Expr parse(std::string_view text, const std::vector<std::string>& allowed_vars);

    /// Reference tree-walk evaluation. Throws DomainError for ln/sqrt of a
    /// negative argument, division by exact zero, and NaN-producing powers.
    double eval(const Env& env) const;

    /// Positional evaluation, `values` in schema order.
    double eval(std::span<const double> values) const;

    /// Precedence-aware rendering that parses back to an equivalent tree.
    std::string to_string() const;

    /// Replace every occurrence of variable `var` with `inner`. The result is
    /// an expression over `inner`'s schema; every other variable of this
    /// expression must be unused.
    Expr substituted(std::uint32_t var, const Expr& inner) const;

    const std::vector<std::string>& variables() const { return vars_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::uint32_t root() const { return root_; }
    const std::string& text() const { return text_; }

    /// True if variable index `var` appears in the tree.
    bool uses_variable(std::uint32_t var) const;

private:
    Expr() = default;

    std::vector<Node> nodes_;
    std::vector<std::string> vars_;
    std::uint32_t root_ = 0;
    std::string text_;
};

}  // namespace smallgain
