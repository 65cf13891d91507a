#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbsde/config.hpp"
#include "fbsde/csv.hpp"
#include "fbsde/manifest.hpp"

namespace {

using fbsde::ExperimentManifest;

struct CommonOpts {
    std::string builtin, configFile;
    std::vector<std::string> params;
    std::uint64_t seed = 1;
    int K = 50, nPaths = 1000, maxIters = 100, perIntervalK = 0;
    double tol = 1e-8, c1 = 4.0, designSpread = 0.0;
    double horizonOverride = -1, truncationRadius = -1;
    std::string truncationMode = "radial", basisKind = "polynomial";
    int basisDegree = 2, basisBins = 8;
    std::string outDir = ".";
    std::vector<std::string> outputs;
};

void add_problem_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--problem", o.builtin, "builtin problem name");
    cmd->add_option("--config", o.configFile, "problem config JSON file");
    cmd->add_option("--param", o.params, "builtin parameter key=value (repeatable)");
}

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "RNG seed (mandatory determinism; default 1)");
    cmd->add_option("-K,--steps", o.K, "time steps");
    cmd->add_option("-n,--n-paths", o.nPaths, "Monte Carlo paths");
    cmd->add_option("--tol", o.tol, "Picard stopping tolerance");
    cmd->add_option("--max-iters", o.maxIters, "Picard iteration cap");
    cmd->add_option("--override", o.horizonOverride, "run beyond the certified horizon up to this T");
    cmd->add_option("--truncation", o.truncationMode, "radial | smooth | off");
    cmd->add_option("--truncation-radius", o.truncationRadius, "explicit clamp radius");
    cmd->add_option("--basis", o.basisKind, "polynomial | local");
    cmd->add_option("--degree", o.basisDegree, "polynomial total degree");
    cmd->add_option("--bins", o.basisBins, "local-partition bins");
    cmd->add_option("--c1", o.c1, "BDG constant in the contraction horizon");
    cmd->add_option("-o,--out-dir", o.outDir, "artifact directory");
    cmd->add_option("--emit", o.outputs, "artifacts: report convergence bounds trajectories theta");
}

nlohmann::ordered_json problem_json(const CommonOpts& o) {
    if (!o.configFile.empty()) {
        std::ifstream in(o.configFile);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + o.configFile);
        nlohmann::ordered_json j;
        in >> j;
        return j;
    }
    if (o.builtin.empty())
        throw CLI::ValidationError("--problem", "either --problem or --config is required");
    nlohmann::ordered_json j;
    j["builtin"] = o.builtin;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--param", "expected key=value, got " + kv);
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    if (!params.empty()) j["params"] = params;
    return j;
}

ExperimentManifest to_manifest(const CommonOpts& o, const std::string& mode) {
    ExperimentManifest m;
    m.mode = mode;
    m.problem = problem_json(o);
    m.seed = o.seed;
    m.K = o.K;
    m.nPaths = o.nPaths;
    m.tol = o.tol;
    m.maxIters = o.maxIters;
    m.perIntervalK = o.perIntervalK;
    m.designSpread = o.designSpread;
    m.c1 = o.c1;
    m.basisKind = o.basisKind;
    m.basisDegree = o.basisDegree;
    m.basisBins = o.basisBins;
    m.truncationMode = o.truncationMode;
    if (o.truncationRadius >= 0) m.truncationRadius = o.truncationRadius;
    if (o.horizonOverride >= 0) m.horizonOverride = o.horizonOverride;
    m.outputDir = o.outDir;
    if (!o.outputs.empty()) m.outputs = o.outputs;
    else if (mode == "bounds") m.outputs = {"bounds"};
    else if (mode == "oracle") m.outputs = {"oracle"};
    else m.outputs = {"report", "convergence"};
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("FBSDE_THREADS"))
        Eigen::setNbThreads(std::atoi(env));

    CLI::App app{
        "Coupled Markovian FBSDE solver: certified small-horizon constants, local Picard/LSMC "
        "solves, global pasting, closed-form and PDE reference solutions.\n"
        "Set FBSDE_THREADS to bound linear-algebra threads."};
    app.require_subcommand(1);

    CommonOpts ob, ol, og, oo;
    std::string manifestPath;

    auto* cBounds = app.add_subcommand("bounds", "print and export the constants suite");
    add_problem_flags(cBounds, ob);
    cBounds->add_option("--c1", ob.c1, "BDG constant in the contraction horizon");
    cBounds->add_option("-o,--out-dir", ob.outDir, "artifact directory");

    auto* cLocal = app.add_subcommand("solve-local", "Picard/LSMC solve on one interval");
    add_problem_flags(cLocal, ol);
    add_solver_flags(cLocal, ol);

    auto* cGlobal = app.add_subcommand("solve-global", "pasted solve over the full horizon");
    add_problem_flags(cGlobal, og);
    add_solver_flags(cGlobal, og);
    cGlobal->add_option("--per-interval-K", og.perIntervalK, "time steps per pasting interval");
    cGlobal->add_option("--design-spread", og.designSpread,
                        "Gaussian spread of interval design states (0 = 3 lambda2 sqrt(T))");

    auto* cOracle = app.add_subcommand("oracle", "tabulate a closed-form reference solution");
    add_problem_flags(cOracle, oo);
    cOracle->add_option("-o,--out-dir", oo.outDir, "artifact directory");

    auto* cExp = app.add_subcommand("experiment", "run a JSON experiment manifest");
    cExp->add_option("manifest", manifestPath, "manifest path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cExp->parsed()) return fbsde::run_manifest(manifestPath);

        const CommonOpts* o = nullptr;
        std::string mode;
        if (cBounds->parsed()) { o = &ob; mode = "bounds"; }
        else if (cLocal->parsed()) { o = &ol; mode = "solve-local"; }
        else if (cGlobal->parsed()) { o = &og; mode = "solve-global"; }
        else { o = &oo; mode = "oracle"; }

        ExperimentManifest m = to_manifest(*o, mode);
        const int rc = fbsde::run_manifest(m);
        if (rc == 0) std::cout << "artifacts written to " << m.outputDir << "\n";
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
