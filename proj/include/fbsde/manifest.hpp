#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbsde/picard.hpp"
#include "json.hpp"

namespace fbsde {

/// A complete, reproducible experiment description. Seeds are mandatory;
/// parse -> serialize -> parse is the identity (canonical key order).
struct ExperimentManifest {
    std::string mode;  // bounds | solve-local | solve-global | oracle
    nlohmann::ordered_json problem;

    int K = 50;
    int nPaths = 1000;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int maxIters = 100;
    int perIntervalK = 0;       // solve-global; defaults to K
    double designSpread = 0;    // solve-global; 0 = 3 lambda2 sqrt(T)
    double c1 = 4.0;
    std::string basisKind = "polynomial";
    int basisDegree = 2;
    int basisBins = 8;
    std::string truncationMode = "radial";  // radial | smooth | off
    std::optional<double> truncationRadius;
    std::optional<double> horizonOverride;

    std::string outputDir = ".";
    std::vector<std::string> outputs;  // report, convergence, bounds, trajectories, theta, oracle

    struct Expected {
        std::string oracle;  // value | delay | linear | martingale
        std::optional<double> value;
        double tolerance = 0.01;  // relative
    };
    std::optional<Expected> expected;
};

ExperimentManifest manifest_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json manifest_to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_file(const std::string& path);

/// Executes the manifest pipeline and writes the configured artifacts.
/// Returns 0 on success, 1 on usage/config error, 2 on solver
/// non-convergence, 3 on expected-result tolerance failure.
int run_manifest(const std::string& path);
int run_manifest(const ExperimentManifest& m);

/// One row per (run, iteration): run_id, n, delta_n, ratio, zmax,
/// truncation_rate. Throws on an empty list.
void emit_convergence_table(const std::vector<SolveReport>& reports, const std::string& path);

}  // namespace fbsde
