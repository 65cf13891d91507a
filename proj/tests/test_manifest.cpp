#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fbsde/config.hpp"
#include "fbsde/csv.hpp"
#include "fbsde/expr.hpp"
#include "fbsde/manifest.hpp"

using namespace fbsde;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("fbsde_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("expression parser: arithmetic, precedence, functions") {
    EvalContext ctx;
    CHECK(Expr("1 + 2 * 3").eval(ctx) == doctest::Approx(7.0));
    CHECK(Expr("(1 + 2) * 3").eval(ctx) == doctest::Approx(9.0));
    CHECK(Expr("2 ^ 3 ^ 2").eval(ctx) == doctest::Approx(512.0));  // right associative
    CHECK(Expr("-2^2").eval(ctx) == doctest::Approx(-4.0));
    CHECK(Expr("10 / 4").eval(ctx) == doctest::Approx(2.5));
    CHECK(Expr("min(3, max(1, 2))").eval(ctx) == doctest::Approx(2.0));
    CHECK(Expr("pow(2, 10)").eval(ctx) == doctest::Approx(1024.0));
    CHECK(Expr("sin(pi/2)").eval(ctx) == doctest::Approx(1.0));
    CHECK(Expr("tanh(0)").eval(ctx) == doctest::Approx(0.0));
    CHECK(Expr("exp(log(5))").eval(ctx) == doctest::Approx(5.0));
    CHECK(Expr("sqrt(abs(-9))").eval(ctx) == doctest::Approx(3.0));
    CHECK(Expr("1e-3 + 2.5e2").eval(ctx) == doctest::Approx(250.001));
}

TEST_CASE("expression parser: variables") {
    Eigen::VectorXd x(2), y(1);
    x << 1.5, -2.0;
    y << 0.25;
    Eigen::MatrixXd z(1, 2);
    z << 3.0, 4.0;
    EvalContext ctx{0.5, &x, &y, &z};
    CHECK(Expr("t * x1 + x2").eval(ctx) == doctest::Approx(-1.25));
    CHECK(Expr("y1 * 4").eval(ctx) == doctest::Approx(1.0));
    CHECK(Expr("z11^2 + z12^2").eval(ctx) == doctest::Approx(25.0));
    const Expr e("x2 + z12");
    CHECK(e.maxX() == 2);
    CHECK(e.maxZCol() == 2);
    CHECK_THROWS(Expr("x1 +"));
    CHECK_THROWS(Expr("foo(3)"));
    CHECK_THROWS(Expr("1 2"));
    CHECK_THROWS(Expr("x0"));
}

TEST_CASE("config: builtin passthrough and expression problems") {
    nlohmann::json jb = {{"builtin", "martingale"}, {"params", {{"T", 0.5}, {"x0", 2.0}}}};
    const FbsdeProblem b = problem_from_json(jb);
    CHECK(b.name == "martingale");
    CHECK(b.horizon == 0.5);
    CHECK(b.x0[0] == 2.0);

    nlohmann::json j = {
        {"name", "custom"},
        {"dims", {{"m", 1}, {"l", 1}, {"d", 1}}},
        {"horizon", 0.25},
        {"x0", {1.0}},
        {"b", {"y1"}},
        {"sigma", {{"1"}}},
        {"g", {"0.5 * sin(x1)"}},
        {"h", {"tanh(x1)"}},
        {"gShape", "diagonal"},
        {"constants",
         {{"k2", 1.0}, {"k3", 0.5}, {"k5", 1.0}, {"lambda1", 1.0}, {"lambda2", 1.0}}}};
    const FbsdeProblem p = problem_from_json(j);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 1);
    CHECK(p.b(0, one, one)[0] == doctest::Approx(1.0));
    CHECK(p.g(0, one, one, z)[0] == doctest::Approx(0.5 * std::sin(1.0)));
    CHECK(p.h(one)[0] == doctest::Approx(std::tanh(1.0)));
    CHECK(p.gShape == GeneratorShape::Diagonal);
    CHECK(p.constants.k3 == 0.5);

    nlohmann::json badVar = j;
    badVar["g"] = {"x2"};  // out of range for m = 1
    CHECK_THROWS(problem_from_json(badVar));
    nlohmann::json badDim = j;
    badDim["dims"]["m"] = 0;
    CHECK_THROWS(problem_from_json(badDim));
}

TEST_CASE("format_full round-trips doubles exactly") {
    for (double v : {0.0, 1.0, -1.5, 1.0 / 3.0, M_PI, 1e-300, 6.02e23, std::log(2.0) / 3.0}) {
        const std::string s = format_full(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv quoting and round-trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");

    const fs::path dir = temp_dir("csv");
    CsvWriter w({"a", "b"});
    w.add_row({"1,5", "x\"y"});
    w.add_row({format_full(1.0 / 3.0), "plain"});
    CHECK_THROWS(w.add_row({"only-one"}));
    const fs::path f = dir / "t.csv";
    w.write(f.string());
    const auto rows = read_csv(f.string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "1,5");
    CHECK(rows[1][1] == "x\"y");
    CHECK(std::strtod(rows[2][0].c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("manifest round-trips parse -> serialize -> parse") {
    nlohmann::ordered_json j = {
        {"mode", "solve-local"},
        {"problem", {{"builtin", "martingale"}, {"params", {{"T", 0.5}, {"x0", 1.0}}}}},
        {"seed", 42},
        {"K", 10},
        {"nPaths", 200},
        {"expected", {{"oracle", "martingale"}, {"tolerance", 0.05}}}};
    const ExperimentManifest m = manifest_from_json(j);
    const nlohmann::ordered_json s1 = manifest_to_json(m);
    const ExperimentManifest m2 = manifest_from_json(s1);
    const nlohmann::ordered_json s2 = manifest_to_json(m2);
    CHECK(s1.dump() == s2.dump());

    nlohmann::ordered_json noSeed = j;
    noSeed.erase("seed");
    CHECK_THROWS(manifest_from_json(noSeed));
    nlohmann::ordered_json badMode = j;
    badMode["mode"] = "dance";
    CHECK_THROWS(manifest_from_json(badMode));
}

TEST_CASE("bounds manifest emits the all-ones constants") {
    const fs::path dir = temp_dir("bounds");
    ExperimentManifest m;
    m.mode = "bounds";
    m.seed = 1;
    m.outputDir = dir.string();
    m.outputs = {"bounds"};
    m.problem = {
        {"dims", {{"m", 1}, {"l", 1}, {"d", 1}}},
        {"horizon", 1.0},
        {"x0", {0.0}},
        {"b", {"x1 + y1"}},
        {"sigma", {{"1"}}},
        {"g", {"x1 + y1"}},
        {"h", {"x1"}},
        {"constants",
         {{"k1", 1.0}, {"k2", 1.0}, {"k3", 1.0}, {"k4", 1.0}, {"k5", 1.0},
          {"lambda1", 1.0}, {"lambda2", 1.0}}}};
    CHECK(run_manifest(m) == 0);
    const auto rows = read_csv((dir / "bounds.csv").string());
    bool sawM = false, sawC1 = false;
    for (const auto& r : rows) {
        if (r[0] == "M") { sawM = true; CHECK(std::strtod(r[1].c_str(), nullptr) == 4.0); }
        if (r[0] == "C1") {
            sawC1 = true;
            CHECK(std::strtod(r[1].c_str(), nullptr) ==
                  doctest::Approx(std::log(2.0) / 3.0).epsilon(1e-15));
        }
    }
    CHECK(sawM);
    CHECK(sawC1);
}

TEST_CASE("solver manifests produce the documented exit codes") {
    const fs::path dir = temp_dir("exit");
    ExperimentManifest m;
    m.mode = "solve-local";
    m.seed = 3;
    m.K = 2000;
    m.nPaths = 1;
    m.outputDir = dir.string();
    m.outputs = {"report", "convergence"};
    m.truncationMode = "off";
    m.horizonOverride = 2.0;
    m.problem = {{"builtin", "delay_counterexample"},
                 {"params", {{"k", 1.0}, {"T", 1.0}, {"x0", 1.0}}}};
    ExperimentManifest::Expected e;
    e.oracle = "delay";
    e.tolerance = 0.01;
    m.expected = e;
    CHECK(run_manifest(m) == 0);

    // same run expecting a wildly wrong value -> oracle-tolerance failure
    ExperimentManifest wrong = m;
    wrong.expected->oracle = "value";
    wrong.expected->value = 100.0;
    CHECK(run_manifest(wrong) == 3);

    // past the solvability threshold -> non-convergence
    ExperimentManifest diverge = m;
    diverge.K = 400;
    diverge.maxIters = 100;
    diverge.problem["params"]["T"] = 1.55;
    diverge.expected.reset();
    CHECK(run_manifest(diverge) == 2);

    // config error
    ExperimentManifest bad = m;
    bad.problem = {{"builtin", "no_such_problem"}};
    CHECK(run_manifest(bad) == 1);
    CHECK(run_manifest("/nonexistent/manifest.json") == 1);
}

TEST_CASE("convergence table round-trips at full precision") {
    SolveReport r;
    r.diffs = {1.0 / 3.0, 1.0 / 7.0, 1.0 / 23.0};
    r.ratios = {(1.0 / 7.0) / (1.0 / 3.0), (1.0 / 23.0) / (1.0 / 7.0)};
    r.converged = true;
    r.zMax = M_PI;
    r.truncationRate = 0.0025;
    const fs::path dir = temp_dir("conv");
    const std::string path = (dir / "conv.csv").string();
    emit_convergence_table({r}, path);
    const auto rows = read_csv(path);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "run_id");
    for (int i = 0; i < 3; ++i)
        CHECK(std::strtod(rows[i + 1][2].c_str(), nullptr) == r.diffs[i]);
    CHECK(std::strtod(rows[2][3].c_str(), nullptr) == r.ratios[0]);
    CHECK(std::strtod(rows[1][4].c_str(), nullptr) == M_PI);
    CHECK(rows[1][3] == "");  // no ratio for the first iteration
    CHECK_THROWS(emit_convergence_table({}, path));
}

TEST_CASE("identical manifests produce bitwise-identical artifacts") {
    ExperimentManifest m;
    m.mode = "solve-local";
    m.seed = 9;
    m.K = 10;
    m.nPaths = 300;
    m.outputs = {"report", "convergence", "trajectories"};
    m.problem = {{"builtin", "linear_decoupled"},
                 {"params", {{"alpha", 0.3}, {"T", 0.4}, {"x0", 1.0}}}};
    const fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2");
    m.outputDir = d1.string();
    REQUIRE(run_manifest(m) == 0);
    m.outputDir = d2.string();
    REQUIRE(run_manifest(m) == 0);
    for (const char* f : {"report.csv", "convergence.csv", "trajectories.csv"})
        CHECK(read_file(d1 / f) == read_file(d2 / f));
}

TEST_CASE("oracle manifest tabulates the closed form") {
    const fs::path dir = temp_dir("oracle");
    ExperimentManifest m;
    m.mode = "oracle";
    m.seed = 1;
    m.outputDir = dir.string();
    m.outputs = {"oracle"};
    m.problem = {{"builtin", "delay_counterexample"},
                 {"params", {{"k", 1.0}, {"T", 1.0}, {"x0", 1.0}}}};
    CHECK(run_manifest(m) == 0);
    const auto rows = read_csv((dir / "oracle.csv").string());
    REQUIRE(rows.size() == 102);
    CHECK(std::strtod(rows[1][2].c_str(), nullptr) == doctest::Approx(std::tan(1.0)));
}
