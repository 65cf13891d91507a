#include "fbsde/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace fbsde {

namespace {
[[noreturn]] void fail(const std::string& src, std::size_t pos, const std::string& what) {
    throw std::invalid_argument("expression error at position " + std::to_string(pos) + " in \"" +
                                src + "\": " + what);
}
}  // namespace

class ExprParser {
public:
    ExprParser(Expr& e, const std::string& src) : e_(e), s_(src) {}

    void run() {
        e_.src_ = s_;
        e_.root_ = parseExpr();
        skipWs();
        if (pos_ != s_.size()) fail(s_, pos_, "unexpected trailing input");
    }

private:
    Expr& e_;
    const std::string& s_;
    std::size_t pos_ = 0;

    using Op = Expr::Node::Op;

    void skipWs() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skipWs();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skipWs();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    int add(Expr::Node n) {
        e_.nodes_.push_back(n);
        return static_cast<int>(e_.nodes_.size()) - 1;
    }
    int binary(Op op, int a, int b) {
        Expr::Node n;
        n.op = op;
        n.a = a;
        n.b = b;
        return add(n);
    }

    // expr := term (('+'|'-') term)*
    int parseExpr() {
        int lhs = parseTerm();
        for (;;) {
            if (consume('+')) lhs = binary(Op::Add, lhs, parseTerm());
            else if (consume('-')) lhs = binary(Op::Sub, lhs, parseTerm());
            else return lhs;
        }
    }
    // term := factor (('*'|'/') factor)*
    int parseTerm() {
        int lhs = parseFactor();
        for (;;) {
            if (consume('*')) lhs = binary(Op::Mul, lhs, parseFactor());
            else if (consume('/')) lhs = binary(Op::Div, lhs, parseFactor());
            else return lhs;
        }
    }
    // factor := ('-'|'+') factor | power   (unary minus binds looser than '^': -2^2 = -4)
    int parseFactor() {
        if (consume('-')) {
            Expr::Node n;
            n.op = Op::Neg;
            n.a = parseFactor();
            return add(n);
        }
        consume('+');
        return parsePow();
    }
    // power := primary ('^' factor)?   (right associative; exponent may carry a sign)
    int parsePow() {
        int base = parsePrimary();
        if (consume('^')) return binary(Op::Pow, base, parseFactor());
        return base;
    }

    int parsePrimary() {
        skipWs();
        if (pos_ >= s_.size()) fail(s_, pos_, "unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parseExpr();
            if (!consume(')')) fail(s_, pos_, "expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parseNumber();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parseIdent();
        fail(s_, pos_, std::string("unexpected character '") + c + "'");
    }

    int parseNumber() {
        const char* start = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) fail(s_, pos_, "bad number");
        pos_ += static_cast<std::size_t>(end - start);
        Expr::Node n;
        n.op = Op::Const;
        n.value = v;
        return add(n);
    }

    int parseIdent() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string id = s_.substr(start, pos_ - start);

        if (id == "pi") {
            Expr::Node n;
            n.op = Op::Const;
            n.value = M_PI;
            return add(n);
        }
        if (id == "t") {
            e_.usesT_ = true;
            Expr::Node n;
            n.op = Op::VarT;
            return add(n);
        }
        if ((id[0] == 'x' || id[0] == 'y') && id.size() > 1 && allDigits(id, 1)) {
            const int idx = std::stoi(id.substr(1));
            if (idx < 1) fail(s_, start, "variable indices are 1-based");
            Expr::Node n;
            n.op = id[0] == 'x' ? Op::VarX : Op::VarY;
            n.i0 = idx;
            (id[0] == 'x' ? e_.maxX_ : e_.maxY_) = std::max(id[0] == 'x' ? e_.maxX_ : e_.maxY_, idx);
            return add(n);
        }
        if (id[0] == 'z' && id.size() == 3 && allDigits(id, 1)) {
            const int row = id[1] - '0', col = id[2] - '0';
            if (row < 1 || col < 1) fail(s_, start, "z indices are 1-based");
            Expr::Node n;
            n.op = Op::VarZ;
            n.i0 = row;
            n.i1 = col;
            e_.maxZRow_ = std::max(e_.maxZRow_, row);
            e_.maxZCol_ = std::max(e_.maxZCol_, col);
            return add(n);
        }

        static const std::pair<const char*, Op> fns1[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan}, {"exp", Op::Exp},
            {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"tanh", Op::Tanh}};
        for (const auto& [name, op] : fns1)
            if (id == name) {
                if (!consume('(')) fail(s_, pos_, id + " expects '('");
                Expr::Node n;
                n.op = op;
                n.a = parseExpr();
                if (!consume(')')) fail(s_, pos_, "expected ')'");
                return add(n);
            }
        if (id == "min" || id == "max" || id == "pow") {
            if (!consume('(')) fail(s_, pos_, id + " expects '('");
            const int a = parseExpr();
            if (!consume(',')) fail(s_, pos_, "expected ','");
            const int b = parseExpr();
            if (!consume(')')) fail(s_, pos_, "expected ')'");
            if (id == "pow") return binary(Op::Pow, a, b);
            return binary(id == "min" ? Op::Min : Op::Max, a, b);
        }
        fail(s_, start, "unknown identifier '" + id + "'");
    }

    static bool allDigits(const std::string& s, std::size_t from) {
        for (std::size_t i = from; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    }
};

Expr::Expr(const std::string& src) {
    ExprParser(*this, src).run();
}

double Expr::evalNode(int i, const EvalContext& ctx) const {
    const Node& n = nodes_[i];
    using Op = Node::Op;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::VarT: return ctx.t;
        case Op::VarX:
            if (!ctx.x || n.i0 > ctx.x->size())
                throw std::out_of_range("expression references x" + std::to_string(n.i0));
            return (*ctx.x)[n.i0 - 1];
        case Op::VarY:
            if (!ctx.y || n.i0 > ctx.y->size())
                throw std::out_of_range("expression references y" + std::to_string(n.i0));
            return (*ctx.y)[n.i0 - 1];
        case Op::VarZ:
            if (!ctx.z || n.i0 > ctx.z->rows() || n.i1 > ctx.z->cols())
                throw std::out_of_range("expression references z" + std::to_string(n.i0) +
                                        std::to_string(n.i1));
            return (*ctx.z)(n.i0 - 1, n.i1 - 1);
        case Op::Add: return evalNode(n.a, ctx) + evalNode(n.b, ctx);
        case Op::Sub: return evalNode(n.a, ctx) - evalNode(n.b, ctx);
        case Op::Mul: return evalNode(n.a, ctx) * evalNode(n.b, ctx);
        case Op::Div: return evalNode(n.a, ctx) / evalNode(n.b, ctx);
        case Op::Pow: return std::pow(evalNode(n.a, ctx), evalNode(n.b, ctx));
        case Op::Neg: return -evalNode(n.a, ctx);
        case Op::Sin: return std::sin(evalNode(n.a, ctx));
        case Op::Cos: return std::cos(evalNode(n.a, ctx));
        case Op::Tan: return std::tan(evalNode(n.a, ctx));
        case Op::Exp: return std::exp(evalNode(n.a, ctx));
        case Op::Log: return std::log(evalNode(n.a, ctx));
        case Op::Sqrt: return std::sqrt(evalNode(n.a, ctx));
        case Op::Abs: return std::abs(evalNode(n.a, ctx));
        case Op::Tanh: return std::tanh(evalNode(n.a, ctx));
        case Op::Min: return std::min(evalNode(n.a, ctx), evalNode(n.b, ctx));
        case Op::Max: return std::max(evalNode(n.a, ctx), evalNode(n.b, ctx));
    }
    throw std::logic_error("expr: bad node");
}

double Expr::eval(const EvalContext& ctx) const {
    if (root_ < 0) throw std::logic_error("expr: empty expression");
    return evalNode(root_, ctx);
}

}  // namespace fbsde
