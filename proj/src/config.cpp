#include "fbsde/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fbsde/expr.hpp"

namespace fbsde {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw std::invalid_argument("config field \"" + field + "\": " + what);
}

double num(const json& j, const std::string& field) {
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

Eigen::MatrixXd matrix(const json& j, const std::string& field, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) bad(field, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            bad(field, "row " + std::to_string(i) + ": expected " + std::to_string(cols) + " entries");
        for (int c = 0; c < cols; ++c) out(i, c) = num(row[c], field);
    }
    return out;
}

std::vector<Expr> exprList(const json& j, const std::string& field, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        bad(field, "expected " + std::to_string(n) + " expression strings");
    std::vector<Expr> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_string()) bad(field, "entry " + std::to_string(i) + " must be a string");
        try {
            out.emplace_back(j[i].get<std::string>());
        } catch (const std::exception& e) {
            bad(field + "[" + std::to_string(i) + "]", e.what());
        }
    }
    return out;
}

GrowthFn growth_from_json(const json& j) {
    GrowthFn g;
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant") g.kind = GrowthFn::Kind::Constant;
    else if (kind == "power") g.kind = GrowthFn::Kind::Power;
    else if (kind == "log") g.kind = GrowthFn::Kind::Log;
    else bad("constants.rho.kind", "must be constant, power, or log");
    g.c = j.value("c", 0.0);
    g.p = j.value("p", 1.0);
    if (g.c < 0 || g.p < 0) bad("constants.rho", "parameters must be nonnegative");
    return g;
}

AssumptionConstants constants_from_json(const json& j, const Dimensions& dims) {
    AssumptionConstants c = AssumptionConstants::zeros(dims);
    if (j.is_null()) return c;
    if (!j.is_object()) bad("constants", "expected an object");
    c.k1 = j.value("k1", 0.0);
    c.k2 = j.value("k2", 0.0);
    c.k3 = j.value("k3", 0.0);
    c.k4 = j.value("k4", 0.0);
    c.k5 = j.value("k5", 0.0);
    c.lambda1 = j.value("lambda1", 0.0);
    c.lambda2 = j.value("lambda2", 0.0);
    c.lambda3 = j.value("lambda3", 0.0);
    c.lambda4 = j.value("lambda4", 0.0);
    c.lambda5 = j.value("lambda5", 0.0);
    c.K = j.value("K", 0.0);
    c.B = j.value("B", 0.0);
    if (j.contains("rho")) c.rho = growth_from_json(j.at("rho"));
    if (j.contains("A")) c.A = matrix(j.at("A"), "constants.A", dims.l, dims.d);
    if (j.contains("qIntegrals"))
        c.qIntegrals = matrix(j.at("qIntegrals"), "constants.qIntegrals", dims.l, dims.d);
    for (double v : {c.k1, c.k2, c.k3, c.k4, c.k5, c.lambda1, c.lambda2, c.lambda3, c.lambda4,
                     c.lambda5, c.K, c.B})
        if (!(v >= 0) || !std::isfinite(v)) bad("constants", "entries must be finite and >= 0");
    return c;
}

void check_indices(const std::vector<Expr>& es, const std::string& field, const Dimensions& dims,
                   bool allowY, bool allowZ, bool allowX = true) {
    for (const Expr& e : es) {
        if (e.maxX() > (allowX ? dims.m : 0)) bad(field, "references x" + std::to_string(e.maxX()));
        if (e.maxY() > (allowY ? dims.l : 0)) bad(field, "references y" + std::to_string(e.maxY()));
        if ((e.maxZRow() > 0 && !allowZ) || e.maxZRow() > dims.l || e.maxZCol() > dims.d)
            bad(field, "references z" + std::to_string(e.maxZRow()) + std::to_string(e.maxZCol()));
    }
}

}  // namespace

FbsdeProblem problem_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");

    if (j.contains("builtin")) {
        std::map<std::string, double> params;
        if (j.contains("params")) {
            if (!j.at("params").is_object()) bad("params", "expected an object");
            for (const auto& [k, v] : j.at("params").items()) params[k] = num(v, "params." + k);
        }
        return builtin_problem(j.at("builtin").get<std::string>(), params);
    }

    FbsdeProblem p;
    p.name = j.value("name", "config");
    if (!j.contains("dims")) bad("dims", "missing");
    const json& jd = j.at("dims");
    p.dims.m = jd.value("m", 0);
    p.dims.l = jd.value("l", 0);
    p.dims.d = jd.value("d", 0);
    if (!p.dims.valid()) bad("dims", "m, l, d must be >= 1");

    p.horizon = num(j.at("horizon"), "horizon");
    if (!(p.horizon > 0)) bad("horizon", "must be positive");

    if (!j.contains("x0")) bad("x0", "missing");
    p.x0 = matrix(json::array({j.at("x0")}), "x0", 1, p.dims.m).transpose();

    auto bs = std::make_shared<std::vector<Expr>>(exprList(j.at("b"), "b", p.dims.m));
    check_indices(*bs, "b", p.dims, /*allowY=*/true, /*allowZ=*/false);

    if (!j.contains("sigma") || !j.at("sigma").is_array() ||
        static_cast<int>(j.at("sigma").size()) != p.dims.m)
        bad("sigma", "expected " + std::to_string(p.dims.m) + " rows");
    auto sigRows = std::make_shared<std::vector<std::vector<Expr>>>();
    for (int i = 0; i < p.dims.m; ++i) {
        sigRows->push_back(exprList(j.at("sigma")[i], "sigma", p.dims.d));
        check_indices(sigRows->back(), "sigma", p.dims, false, false, /*allowX=*/false);
    }

    auto gs = std::make_shared<std::vector<Expr>>(exprList(j.at("g"), "g", p.dims.l));
    check_indices(*gs, "g", p.dims, true, true);
    auto hs = std::make_shared<std::vector<Expr>>(exprList(j.at("h"), "h", p.dims.l));
    check_indices(*hs, "h", p.dims, false, false);

    const Dimensions dims = p.dims;
    p.b = [bs, dims](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        EvalContext ctx{t, &x, &y, nullptr};
        Eigen::VectorXd out(dims.m);
        for (int i = 0; i < dims.m; ++i) out[i] = (*bs)[i].eval(ctx);
        return out;
    };
    p.sigma = [sigRows, dims](double t) {
        EvalContext ctx{t, nullptr, nullptr, nullptr};
        Eigen::MatrixXd out(dims.m, dims.d);
        for (int i = 0; i < dims.m; ++i)
            for (int c = 0; c < dims.d; ++c) out(i, c) = (*sigRows)[i][c].eval(ctx);
        return out;
    };
    p.g = [gs, dims](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& z) {
        EvalContext ctx{t, &x, &y, &z};
        Eigen::VectorXd out(dims.l);
        for (int i = 0; i < dims.l; ++i) out[i] = (*gs)[i].eval(ctx);
        return out;
    };
    p.h = [hs, dims](const Eigen::VectorXd& x) {
        EvalContext ctx{0, &x, nullptr, nullptr};
        Eigen::VectorXd out(dims.l);
        for (int i = 0; i < dims.l; ++i) out[i] = (*hs)[i].eval(ctx);
        return out;
    };

    const std::string shape = j.value("gShape", "general");
    if (shape == "general") p.gShape = GeneratorShape::General;
    else if (shape == "diagonal") p.gShape = GeneratorShape::Diagonal;
    else bad("gShape", "must be general or diagonal");

    p.constants = constants_from_json(j.contains("constants") ? j.at("constants") : json(), p.dims);
    return p;
}

FbsdeProblem problem_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open problem config: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    return problem_from_json(j);
}

}  // namespace fbsde
