#include "smallgain/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "smallgain/detail/scalar_ops.hpp"

namespace smallgain {

namespace {

struct BuiltinInfo {
    const char* name;
    Builtin fn;
    int arity;
};

constexpr BuiltinInfo kBuiltins[] = {
    {"sin", Builtin::Sin, 1},   {"cos", Builtin::Cos, 1},
    {"tan", Builtin::Tan, 1},   {"exp", Builtin::Exp, 1},
    {"ln", Builtin::Ln, 1},     {"sqrt", Builtin::Sqrt, 1},
    {"abs", Builtin::Abs, 1},   {"min", Builtin::Min, 2},
    {"max", Builtin::Max, 2},   {"tanh", Builtin::Tanh, 1},
    {"sign", Builtin::Sign, 1},
};

const BuiltinInfo* find_builtin(std::string_view name) {
    for (const auto& b : kBuiltins) {
        if (name == b.name) return &b;
    }
    return nullptr;
}

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
    Kind kind = Kind::End;
    double number = 0.0;
    std::string ident;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        current_ = Token{};
        current_.pos = i_;
        if (i_ >= text_.size()) {
            current_.kind = Token::Kind::End;
            return;
        }
        char c = text_[i_];
        switch (c) {
            case '+': current_.kind = Token::Kind::Plus; ++i_; return;
            case '-': current_.kind = Token::Kind::Minus; ++i_; return;
            case '*': current_.kind = Token::Kind::Star; ++i_; return;
            case '/': current_.kind = Token::Kind::Slash; ++i_; return;
            case '^': current_.kind = Token::Kind::Caret; ++i_; return;
            case '(': current_.kind = Token::Kind::LParen; ++i_; return;
            case ')': current_.kind = Token::Kind::RParen; ++i_; return;
            case ',': current_.kind = Token::Kind::Comma; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[i_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
                ++i_;
            }
            current_.kind = Token::Kind::Ident;
            current_.ident = std::string(text_.substr(start, i_ - start));
            return;
        }
        throw SyntaxError(i_, std::string("unexpected character '") + c + "'");
    }

    void lex_number() {
        std::size_t start = i_;
        while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
        if (i_ < text_.size() && text_[i_] == '.') {
            ++i_;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
        }
        if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
            std::size_t mark = i_;
            ++i_;
            if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
            if (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
                while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
            } else {
                i_ = mark;  // not an exponent, e.g. "2*exp(s)"
            }
        }
        std::string slice(text_.substr(start, i_ - start));
        current_.kind = Token::Kind::Number;
        current_.number = std::strtod(slice.c_str(), nullptr);
    }

    std::string_view text_;
    std::size_t i_ = 0;
    Token current_;
};

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars,
           std::vector<Node>& nodes)
        : lexer_(text), vars_(vars), nodes_(nodes) {}

    std::uint32_t parse_expression() {
        std::uint32_t root = parse_sum();
        if (lexer_.peek().kind != Token::Kind::End) {
            throw SyntaxError(lexer_.peek().pos, "unexpected trailing input");
        }
        return root;
    }

private:
    std::uint32_t add_node(Node n) {
        nodes_.push_back(n);
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    std::uint32_t parse_sum() {
        std::uint32_t lhs = parse_term();
        while (true) {
            auto kind = lexer_.peek().kind;
            if (kind != Token::Kind::Plus && kind != Token::Kind::Minus) return lhs;
            Token op = lexer_.take();
            std::uint32_t rhs = parse_term();
            Node n;
            n.kind = Node::Kind::Binary;
            n.bop = kind == Token::Kind::Plus ? BinaryOp::Add : BinaryOp::Sub;
            n.lhs = lhs;
            n.rhs = rhs;
            n.pos = static_cast<std::uint32_t>(op.pos);
            lhs = add_node(n);
        }
    }

    std::uint32_t parse_term() {
        std::uint32_t lhs = parse_unary();
        while (true) {
            auto kind = lexer_.peek().kind;
            if (kind != Token::Kind::Star && kind != Token::Kind::Slash) return lhs;
            Token op = lexer_.take();
            std::uint32_t rhs = parse_unary();
            Node n;
            n.kind = Node::Kind::Binary;
            n.bop = kind == Token::Kind::Star ? BinaryOp::Mul : BinaryOp::Div;
            n.lhs = lhs;
            n.rhs = rhs;
            n.pos = static_cast<std::uint32_t>(op.pos);
            lhs = add_node(n);
        }
    }

    // Unary minus binds tighter than '*' but looser than '^', so
    // -x^2 = -(x^2) and 2^-3 = 2^(-3).
    std::uint32_t parse_unary() {
        auto kind = lexer_.peek().kind;
        if (kind == Token::Kind::Plus) {
            lexer_.take();
            return parse_unary();
        }
        if (kind == Token::Kind::Minus) {
            Token op = lexer_.take();
            std::uint32_t child = parse_unary();
            Node n;
            n.kind = Node::Kind::Unary;
            n.uop = UnaryOp::Neg;
            n.lhs = child;
            n.pos = static_cast<std::uint32_t>(op.pos);
            return add_node(n);
        }
        return parse_power();
    }

    std::uint32_t parse_power() {
        std::uint32_t base = parse_primary();
        if (lexer_.peek().kind != Token::Kind::Caret) return base;
        Token op = lexer_.take();
        std::uint32_t exponent = parse_unary();  // right-associative
        Node n;
        n.kind = Node::Kind::Binary;
        n.bop = BinaryOp::Pow;
        n.lhs = base;
        n.rhs = exponent;
        n.pos = static_cast<std::uint32_t>(op.pos);
        return add_node(n);
    }

    std::uint32_t parse_primary() {
        Token t = lexer_.take();
        switch (t.kind) {
            case Token::Kind::Number: {
                Node n;
                n.kind = Node::Kind::Number;
                n.number = t.number;
                n.pos = static_cast<std::uint32_t>(t.pos);
                return add_node(n);
            }
            case Token::Kind::LParen: {
                std::uint32_t inner = parse_sum();
                expect_rparen(lexer_.peek().pos);
                return inner;
            }
            case Token::Kind::Ident:
                return parse_ident(t);
            case Token::Kind::End:
                throw SyntaxError(t.pos, "unexpected end of input");
            default:
                throw SyntaxError(t.pos, "expected a number, variable, or '('");
        }
    }

    std::uint32_t parse_ident(const Token& t) {
        if (lexer_.peek().kind == Token::Kind::LParen) {
            const BuiltinInfo* info = find_builtin(t.ident);
            if (info == nullptr) throw UnknownIdentifierError(t.ident);
            lexer_.take();  // '('
            std::vector<std::uint32_t> args;
            if (lexer_.peek().kind != Token::Kind::RParen) {
                args.push_back(parse_sum());
                while (lexer_.peek().kind == Token::Kind::Comma) {
                    lexer_.take();
                    args.push_back(parse_sum());
                }
            }
            expect_rparen(lexer_.peek().pos);
            if (static_cast<int>(args.size()) != info->arity) {
                throw ArityError(t.ident, info->arity, static_cast<int>(args.size()));
            }
            Node n;
            n.kind = Node::Kind::Call;
            n.fn = info->fn;
            n.lhs = args[0];
            n.rhs = args.size() > 1 ? args[1] : 0;
            n.pos = static_cast<std::uint32_t>(t.pos);
            return add_node(n);
        }
        if (t.ident == "pi") {
            Node n;
            n.kind = Node::Kind::Number;
            n.number = M_PI;
            n.pos = static_cast<std::uint32_t>(t.pos);
            return add_node(n);
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == t.ident) {
                Node n;
                n.kind = Node::Kind::Var;
                n.var = static_cast<std::uint32_t>(i);
                n.pos = static_cast<std::uint32_t>(t.pos);
                return add_node(n);
            }
        }
        throw UnknownIdentifierError(t.ident);
    }

    void expect_rparen(std::size_t pos) {
        if (lexer_.peek().kind != Token::Kind::RParen) {
            throw SyntaxError(pos, "expected ')'");
        }
        lexer_.take();
    }

    Lexer lexer_;
    const std::vector<std::string>& vars_;
    std::vector<Node>& nodes_;
};

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int builtin_arity(Builtin fn) {
    return (fn == Builtin::Min || fn == Builtin::Max) ? 2 : 1;
}

const char* builtin_name(Builtin fn) {
    for (const auto& b : kBuiltins) {
        if (b.fn == fn) return b.name;
    }
    return "?";
}

Expr Expr::parse(std::string_view text, const std::vector<std::string>& allowed_vars) {
    if (allowed_vars.empty()) {
        throw SyntaxError(0, "variable schema must not be empty");
    }
    for (std::size_t i = 0; i < allowed_vars.size(); ++i) {
        const std::string& name = allowed_vars[i];
        if (name == "pi" || find_builtin(name) != nullptr) {
            throw SyntaxError(0, "variable name '" + name + "' collides with a builtin");
        }
        for (std::size_t j = i + 1; j < allowed_vars.size(); ++j) {
            if (allowed_vars[j] == name) {
                throw SyntaxError(0, "duplicate variable '" + name + "' in schema");
            }
        }
    }
    Expr e;
    e.vars_ = allowed_vars;
    e.text_ = std::string(text);
    Parser parser(text, e.vars_, e.nodes_);
    e.root_ = parser.parse_expression();
    return e;
}

namespace {

double eval_node(const std::vector<Node>& nodes, std::uint32_t idx,
                 std::span<const double> values) {
    const Node& n = nodes[idx];
    using detail::op_abs;
    switch (n.kind) {
        case Node::Kind::Number:
            return n.number;
        case Node::Kind::Var:
            return values[n.var];
        case Node::Kind::Unary:
            return detail::op_neg(eval_node(nodes, n.lhs, values));
        case Node::Kind::Binary: {
            double a = eval_node(nodes, n.lhs, values);
            double b = eval_node(nodes, n.rhs, values);
            switch (n.bop) {
                case BinaryOp::Add: return detail::op_add(a, b);
                case BinaryOp::Sub: return detail::op_sub(a, b);
                case BinaryOp::Mul: return detail::op_mul(a, b);
                case BinaryOp::Div:
                    if (b == 0.0) throw DomainError("division by zero", n.pos);
                    return detail::op_div(a, b);
                case BinaryOp::Pow: {
                    double r = detail::op_pow(a, b);
                    if (std::isnan(r)) throw DomainError("pow", n.pos);
                    return r;
                }
            }
            break;
        }
        case Node::Kind::Call: {
            double a = eval_node(nodes, n.lhs, values);
            switch (n.fn) {
                case Builtin::Sin: return detail::op_sin(a);
                case Builtin::Cos: return detail::op_cos(a);
                case Builtin::Tan: return detail::op_tan(a);
                case Builtin::Exp: return detail::op_exp(a);
                case Builtin::Ln:
                    if (a < 0.0) throw DomainError("ln", n.pos);
                    return detail::op_ln(a);
                case Builtin::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt", n.pos);
                    return detail::op_sqrt(a);
                case Builtin::Abs: return op_abs(a);
                case Builtin::Tanh: return detail::op_tanh(a);
                case Builtin::Sign: return detail::op_sign(a);
                case Builtin::Min:
                    return detail::op_min(a, eval_node(nodes, n.rhs, values));
                case Builtin::Max:
                    return detail::op_max(a, eval_node(nodes, n.rhs, values));
            }
            break;
        }
    }
    throw Error("corrupt expression node");
}

}  // namespace

double Expr::eval(std::span<const double> values) const {
    if (values.size() != vars_.size()) {
        throw DimensionMismatchError(vars_.size(), values.size());
    }
    return eval_node(nodes_, root_, values);
}

double Expr::eval(const Env& env) const {
    std::vector<double> values(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = env.find(vars_[i]);
        if (it == env.end()) throw UnknownIdentifierError(vars_[i]);
        values[i] = it->second;
    }
    return eval_node(nodes_, root_, values);
}

namespace {

// Precedence levels used for minimal parenthesisation.
constexpr int kPrecSum = 1;
constexpr int kPrecTerm = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

void print_node(const std::vector<Node>& nodes, const std::vector<std::string>& vars,
                std::uint32_t idx, int parent_prec, std::string& out) {
    const Node& n = nodes[idx];
    switch (n.kind) {
        case Node::Kind::Number:
            out += format_number(n.number);
            return;
        case Node::Kind::Var:
            out += vars[n.var];
            return;
        case Node::Kind::Unary: {
            bool parens = parent_prec > kPrecUnary;
            if (parens) out += '(';
            out += '-';
            print_node(nodes, vars, n.lhs, kPrecUnary, out);
            if (parens) out += ')';
            return;
        }
        case Node::Kind::Binary: {
            int prec = 0;
            char op = '?';
            switch (n.bop) {
                case BinaryOp::Add: prec = kPrecSum; op = '+'; break;
                case BinaryOp::Sub: prec = kPrecSum; op = '-'; break;
                case BinaryOp::Mul: prec = kPrecTerm; op = '*'; break;
                case BinaryOp::Div: prec = kPrecTerm; op = '/'; break;
                case BinaryOp::Pow: prec = kPrecPow; op = '^'; break;
            }
            bool parens = parent_prec > prec;
            if (parens) out += '(';
            if (n.bop == BinaryOp::Pow) {
                print_node(nodes, vars, n.lhs, kPrecAtom, out);
                out += op;
                print_node(nodes, vars, n.rhs, kPrecPow, out);
            } else {
                print_node(nodes, vars, n.lhs, prec, out);
                out += op;
                print_node(nodes, vars, n.rhs, prec + 1, out);
            }
            if (parens) out += ')';
            return;
        }
        case Node::Kind::Call: {
            out += builtin_name(n.fn);
            out += '(';
            print_node(nodes, vars, n.lhs, 0, out);
            if (builtin_arity(n.fn) == 2) {
                out += ',';
                print_node(nodes, vars, n.rhs, 0, out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace

std::string Expr::to_string() const {
    std::string out;
    print_node(nodes_, vars_, root_, 0, out);
    return out;
}

bool Expr::uses_variable(std::uint32_t var) const {
    for (const Node& n : nodes_) {
        if (n.kind == Node::Kind::Var && n.var == var) return true;
    }
    return false;
}

Expr Expr::substituted(std::uint32_t var, const Expr& inner) const {
    for (std::uint32_t v = 0; v < vars_.size(); ++v) {
        if (v != var && uses_variable(v)) {
            throw Error("substitution requires every other variable to be unused");
        }
    }
    Expr out;
    out.vars_ = inner.vars_;
    out.nodes_ = inner.nodes_;
    out.text_ = "(" + text_ + ") with " + vars_[var] + " = " + inner.text_;
    const std::uint32_t offset = static_cast<std::uint32_t>(out.nodes_.size());
    for (const Node& n : nodes_) {
        Node copy = n;
        if (copy.kind == Node::Kind::Var && copy.var == var) {
            // handled below by redirecting references; keep placeholder
        } else {
            switch (copy.kind) {
                case Node::Kind::Unary:
                    copy.lhs += offset;
                    break;
                case Node::Kind::Binary:
                    copy.lhs += offset;
                    copy.rhs += offset;
                    break;
                case Node::Kind::Call:
                    copy.lhs += offset;
                    if (builtin_arity(copy.fn) == 2) copy.rhs += offset;
                    break;
                default:
                    break;
            }
        }
        out.nodes_.push_back(copy);
    }
    // Redirect copied Var(var) nodes to the root of the inner tree by turning
    // child links that point at them toward inner's root instead.
    for (std::size_t i = offset; i < out.nodes_.size(); ++i) {
        Node& n = out.nodes_[i];
        auto redirect = [&](std::uint32_t& child) {
            const Node& c = out.nodes_[child];
            if (c.kind == Node::Kind::Var && c.var == var && child >= offset) {
                child = inner.root();
            }
        };
        switch (n.kind) {
            case Node::Kind::Unary:
                redirect(n.lhs);
                break;
            case Node::Kind::Binary:
                redirect(n.lhs);
                redirect(n.rhs);
                break;
            case Node::Kind::Call:
                redirect(n.lhs);
                if (builtin_arity(n.fn) == 2) redirect(n.rhs);
                break;
            default:
                break;
        }
    }
    std::uint32_t root = offset + root_;
    const Node& r = out.nodes_[root];
    if (r.kind == Node::Kind::Var && r.var == var) root = inner.root();
    // Neutralize the now-orphaned placeholder nodes.
    for (std::size_t i = offset; i < out.nodes_.size(); ++i) {
        Node& n = out.nodes_[i];
        if (n.kind == Node::Kind::Var && n.var == var) {
            n.kind = Node::Kind::Number;
            n.number = 0.0;
        }
    }
    out.root_ = root;
    return out;
}

}  // namespace smallgain
