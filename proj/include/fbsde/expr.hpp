#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace fbsde {

struct EvalContext {
    double t = 0;
    const Eigen::VectorXd* x = nullptr;
    const Eigen::VectorXd* y = nullptr;
    const Eigen::MatrixXd* z = nullptr;  // l x d
};

/// Compiled scalar expression over t, x1.., y1.., z11.. (1-based indices;
/// z_ij written as "z" + row + col, single digits). Supports + - * / ^ with
/// the usual precedence, unary minus, parentheses, numeric literals, and the
/// functions sin cos tan exp log sqrt abs tanh min max pow.
class Expr {
public:
    Expr() = default;
    explicit Expr(const std::string& src);  // throws std::invalid_argument on parse errors

    double eval(const EvalContext& ctx) const;
    /// Largest referenced 1-based indices, for schema validation.
    int maxX() const { return maxX_; }
    int maxY() const { return maxY_; }
    int maxZRow() const { return maxZRow_; }
    int maxZCol() const { return maxZCol_; }
    bool usesT() const { return usesT_; }
    const std::string& source() const { return src_; }

private:
    struct Node;
    std::vector<Node> nodes_;
    int root_ = -1;
    int maxX_ = 0, maxY_ = 0, maxZRow_ = 0, maxZCol_ = 0;
    bool usesT_ = false;
    std::string src_;

    double evalNode(int i, const EvalContext& ctx) const;
    friend class ExprParser;
};

struct Expr::Node {
    enum class Op {
        Const, VarT, VarX, VarY, VarZ,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh,
        Min, Max
    };
    Op op = Op::Const;
    double value = 0;
    int i0 = 0, i1 = 0;  // variable indices (1-based) for VarX/VarY/VarZ
    int a = -1, b = -1;  // child node indices
};

}  // namespace fbsde
