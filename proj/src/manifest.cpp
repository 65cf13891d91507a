#include "fbsde/manifest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "fbsde/config.hpp"
#include "fbsde/csv.hpp"
#include "fbsde/global_paste.hpp"
#include "fbsde/oracle.hpp"

namespace fbsde {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw std::invalid_argument("manifest field \"" + field + "\": " + what);
}

bool has_output(const ExperimentManifest& m, const std::string& kind) {
    for (const auto& o : m.outputs)
        if (o == kind) return true;
    return false;
}

std::string out_path(const ExperimentManifest& m, const std::string& file) {
    return (std::filesystem::path(m.outputDir) / file).string();
}

BasisSpec basis_of(const ExperimentManifest& m) {
    BasisSpec b;
    if (m.basisKind == "polynomial") b.kind = BasisSpec::Kind::Polynomial;
    else if (m.basisKind == "local") b.kind = BasisSpec::Kind::LocalPartition;
    else bad("basis.kind", "must be polynomial or local");
    b.degree = m.basisDegree;
    b.bins = m.basisBins;
    return b;
}

PicardConfig picard_of(const ExperimentManifest& m) {
    PicardConfig cfg;
    cfg.maxIters = m.maxIters;
    cfg.tol = m.tol;
    cfg.horizonOverride = m.horizonOverride;
    cfg.bounds.c1 = m.c1;
    cfg.backward.basis = basis_of(m);
    cfg.backward.truncationRadius = m.truncationRadius;
    if (m.truncationMode == "radial") cfg.backward.truncationMode = TruncationMode::Radial;
    else if (m.truncationMode == "smooth") cfg.backward.truncationMode = TruncationMode::Smooth;
    else if (m.truncationMode == "off") cfg.backward.truncationMode = TruncationMode::Off;
    else bad("truncationMode", "must be radial, smooth, or off");
    return cfg;
}

void write_report_csv(const SolveReport& rep, const std::string& path) {
    CsvWriter w({"key", "value"});
    w.add_row({"iterates", std::to_string(rep.iterates)});
    w.add_row({"converged", rep.converged ? "1" : "0"});
    w.add_row({"diverged", rep.diverged ? "1" : "0"});
    w.add_row({"certificate", rep.certificate});
    w.add_row({"zMax", format_full(rep.zMax)});
    w.add_row({"truncationRate", format_full(rep.truncationRate)});
    for (int i = 0; i < rep.y0Mean.size(); ++i)
        w.add_row({"y0_mean_" + std::to_string(i + 1), format_full(rep.y0Mean[i])});
    w.add_row({"failure", rep.failure});
    w.write(path);
}

void write_bounds_csv(const BoundsReport& b, const std::string& path) {
    CsvWriter w({"key", "value"});
    w.add_row({"M", format_full(b.M)});
    w.add_row({"Q", format_full(b.Q)});
    w.add_row({"C1", format_full(b.C1)});
    w.add_row({"C2", format_full(b.C2)});
    w.add_row({"C_loc", format_full(b.C_loc)});
    w.add_row({"K5", format_full(b.K5)});
    w.add_row({"M_bar", format_full(b.M_bar)});
    w.add_row({"C_bar", format_full(b.C_bar)});
    for (std::size_t i = 0; i < b.pastingGrid.size(); ++i)
        w.add_row({"t_" + std::to_string(i), format_full(b.pastingGrid[i])});
    if (b.globalCertificateN)
        w.add_row({"globalCertificateN", std::to_string(*b.globalCertificateN)});
    w.write(path);
}

void write_trajectories_csv(const PathEnsemble& ens, const std::string& path) {
    std::vector<std::string> header = {"path", "k", "t"};
    for (int i = 1; i <= ens.dims.m; ++i) header.push_back("x" + std::to_string(i));
    for (int i = 1; i <= ens.dims.l; ++i) header.push_back("y" + std::to_string(i));
    for (int i = 1; i <= ens.dims.l; ++i)
        for (int j = 1; j <= ens.dims.d; ++j)
            header.push_back("z" + std::to_string(i) + std::to_string(j));
    CsvWriter w(header);
    for (int p = 0; p < ens.nPaths; ++p)
        for (int k = 0; k <= ens.grid.steps(); ++k) {
            std::vector<std::string> row = {std::to_string(p), std::to_string(k),
                                            format_full(ens.grid.times[k])};
            for (int i = 0; i < ens.dims.m; ++i) row.push_back(format_full(ens.x_at(p, k)[i]));
            for (int i = 0; i < ens.dims.l; ++i) row.push_back(format_full(ens.y_at(p, k)[i]));
            if (k < ens.grid.steps()) {
                const auto z = ens.z_at(p, k);
                for (int i = 0; i < ens.dims.l; ++i)
                    for (int j = 0; j < ens.dims.d; ++j) row.push_back(format_full(z(i, j)));
            } else {
                for (int i = 0; i < ens.dims.l * ens.dims.d; ++i) row.push_back("");
            }
            w.add_row(row);
        }
    w.write(path);
}

void write_theta_csv(const DecouplingField& field, const Dimensions& dims,
                     const ExperimentManifest& m) {
    {
        CsvWriter w({"time_index", "time", "feature", "component", "coefficient"});
        for (std::size_t i = 0; i < field.maps.size(); ++i) {
            const auto& beta = field.maps[i].beta;
            for (int f = 0; f < beta.rows(); ++f)
                for (int c = 0; c < beta.cols(); ++c)
                    w.add_row({std::to_string(i), format_full(field.times[i]), std::to_string(f),
                               std::to_string(c + 1), format_full(beta(f, c))});
        }
        w.write(out_path(m, "theta.csv"));
    }
    if (dims.m == 1) {
        CsvWriter w({"time", "x", "theta"});
        for (std::size_t i = 0; i < field.maps.size(); ++i) {
            if (field.maps[i].beta.size() == 0 || field.fitLo[i].size() == 0) continue;
            const double lo = field.fitLo[i][0], hi = field.fitHi[i][0];
            for (int s = 0; s <= 50; ++s) {
                const double x = lo + (hi - lo) * s / 50.0;
                const double th = field.maps[i].eval(Eigen::VectorXd::Constant(1, x))[0];
                w.add_row({format_full(field.times[i]), format_full(x), format_full(th)});
            }
        }
        w.write(out_path(m, "theta_table.csv"));
    }
}

/// 0 = within tolerance, 3 = outside. Relative tolerance against the
/// expected magnitude (absolute when the expected value is small).
int check_expected(const ExperimentManifest& m, const Eigen::VectorXd& y0Mean) {
    if (!m.expected) return 0;
    const auto& e = *m.expected;
    double want = 0;
    if (e.oracle == "value") {
        if (!e.value) bad("expected.value", "required for oracle = value");
        want = *e.value;
    } else {
        const ordered_json& pj = m.problem;
        if (!pj.contains("builtin")) bad("expected", "oracle references require a builtin problem");
        const std::string builtin = pj.at("builtin").get<std::string>();
        auto param = [&pj](const std::string& key, double dflt) {
            return pj.contains("params") ? pj.at("params").value(key, dflt) : dflt;
        };
        if (e.oracle == "delay") {
            OracleSolution s = delay_oracle(param("k", 1.0), param("T", 1.0), param("x0", 0.0),
                                            param("eps_terminal", 0.0));
            if (s.singular) bad("expected", "delay oracle is singular at these parameters");
            want = s.Y(0.0);
        } else if (e.oracle == "linear") {
            want = std::exp(param("alpha", 1.0) * param("T", 1.0)) * param("x0", 0.0);
        } else if (e.oracle == "martingale") {
            want = param("x0", 0.0);
        } else {
            bad("expected.oracle", "must be value, delay, linear, or martingale");
        }
        (void)builtin;
    }
    const double got = y0Mean.size() > 0 ? y0Mean[0] : 0.0;
    const double scale = std::max(std::abs(want), 1.0);
    if (std::abs(got - want) > e.tolerance * scale) {
        std::cerr << "expected-result check failed: Y0 = " << got << ", expected " << want
                  << " within " << e.tolerance * 100 << "%\n";
        return 3;
    }
    return 0;
}

int run_oracle_mode(const ExperimentManifest& m) {
    const ordered_json& pj = m.problem;
    if (!pj.contains("builtin")) bad("problem", "oracle mode requires a builtin problem");
    const std::string builtin = pj.at("builtin").get<std::string>();
    auto param = [&pj](const std::string& key, double dflt) {
        return pj.contains("params") ? pj.at("params").value(key, dflt) : dflt;
    };
    OracleSolution s;
    if (builtin == "delay_counterexample") {
        s = delay_oracle(param("k", 1.0), param("T", 1.0), param("x0", 0.0),
                         param("eps_terminal", 0.0));
    } else if (builtin == "linear_decoupled" || builtin == "martingale") {
        const double alpha = builtin == "martingale" ? 0.0 : param("alpha", 1.0);
        s = linear_bsde_oracle(alpha, param("T", 1.0), param("x0", 0.0));
    } else {
        bad("problem", "no closed-form oracle for builtin " + builtin);
    }
    if (s.singular) {
        std::cerr << "oracle is singular at these parameters\n";
        return 1;
    }
    CsvWriter w({"t", "X", "Y", "Z"});
    for (int i = 0; i <= 100; ++i) {
        const double t = s.tMin + (s.tMax - s.tMin) * i / 100.0;
        w.add_row({format_full(t), s.X ? format_full(s.X(t)) : "",
                   s.Y ? format_full(s.Y(t)) : "", s.Z ? format_full(s.Z(t)) : ""});
    }
    w.write(out_path(m, "oracle.csv"));
    return 0;
}

}  // namespace

ExperimentManifest manifest_from_json(const ordered_json& j) {
    if (!j.is_object()) throw std::invalid_argument("manifest: expected a JSON object");
    ExperimentManifest m;
    if (!j.contains("mode")) bad("mode", "missing");
    m.mode = j.at("mode").get<std::string>();
    if (m.mode != "bounds" && m.mode != "solve-local" && m.mode != "solve-global" &&
        m.mode != "oracle")
        bad("mode", "must be bounds, solve-local, solve-global, or oracle");
    if (!j.contains("problem")) bad("problem", "missing");
    m.problem = j.at("problem");
    if (!j.contains("seed")) bad("seed", "mandatory (no wall-clock seeding)");
    m.seed = j.at("seed").get<std::uint64_t>();

    m.K = j.value("K", 50);
    m.nPaths = j.value("nPaths", 1000);
    m.tol = j.value("tol", 1e-8);
    m.maxIters = j.value("maxIters", 100);
    m.perIntervalK = j.value("perIntervalK", 0);
    m.designSpread = j.value("designSpread", 0.0);
    m.c1 = j.value("c1", 4.0);
    if (m.K < 1 || m.nPaths < 1 || m.maxIters < 1 || !(m.tol > 0))
        bad("K/nPaths/maxIters/tol", "must be positive");

    if (j.contains("basis")) {
        const auto& b = j.at("basis");
        m.basisKind = b.value("kind", "polynomial");
        m.basisDegree = b.value("degree", 2);
        m.basisBins = b.value("bins", 8);
    }
    m.truncationMode = j.value("truncationMode", "radial");
    if (j.contains("truncationRadius")) m.truncationRadius = j.at("truncationRadius").get<double>();
    if (j.contains("horizonOverride")) m.horizonOverride = j.at("horizonOverride").get<double>();

    m.outputDir = j.value("outputDir", ".");
    if (j.contains("outputs")) {
        for (const auto& o : j.at("outputs")) m.outputs.push_back(o.get<std::string>());
    } else {
        if (m.mode == "bounds") m.outputs = {"bounds"};
        else if (m.mode == "oracle") m.outputs = {"oracle"};
        else m.outputs = {"report", "convergence"};
    }

    if (j.contains("expected")) {
        const auto& e = j.at("expected");
        ExperimentManifest::Expected ex;
        ex.oracle = e.value("oracle", "value");
        if (e.contains("value")) ex.value = e.at("value").get<double>();
        ex.tolerance = e.value("tolerance", 0.01);
        m.expected = ex;
    }
    return m;
}

ordered_json manifest_to_json(const ExperimentManifest& m) {
    ordered_json j;
    j["mode"] = m.mode;
    j["problem"] = m.problem;
    j["seed"] = m.seed;
    j["K"] = m.K;
    j["nPaths"] = m.nPaths;
    j["tol"] = m.tol;
    j["maxIters"] = m.maxIters;
    j["perIntervalK"] = m.perIntervalK;
    j["designSpread"] = m.designSpread;
    j["c1"] = m.c1;
    j["basis"] = {{"kind", m.basisKind}, {"degree", m.basisDegree}, {"bins", m.basisBins}};
    j["truncationMode"] = m.truncationMode;
    if (m.truncationRadius) j["truncationRadius"] = *m.truncationRadius;
    if (m.horizonOverride) j["horizonOverride"] = *m.horizonOverride;
    j["outputDir"] = m.outputDir;
    j["outputs"] = m.outputs;
    if (m.expected) {
        ordered_json e;
        e["oracle"] = m.expected->oracle;
        if (m.expected->value) e["value"] = *m.expected->value;
        e["tolerance"] = m.expected->tolerance;
        j["expected"] = e;
    }
    return j;
}

ExperimentManifest manifest_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open manifest: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("manifest parse error in " + path + ": " + e.what());
    }
    return manifest_from_json(j);
}

void emit_convergence_table(const std::vector<SolveReport>& reports, const std::string& path) {
    if (reports.empty())
        throw std::invalid_argument("emit_convergence_table: empty report list");
    CsvWriter w({"run_id", "n", "delta_n", "ratio", "zmax", "truncation_rate"});
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const SolveReport& rep = reports[r];
        for (std::size_t n = 0; n < rep.diffs.size(); ++n)
            w.add_row({std::to_string(r), std::to_string(n), format_full(rep.diffs[n]),
                       n >= 1 && n - 1 < rep.ratios.size() ? format_full(rep.ratios[n - 1]) : "",
                       format_full(rep.zMax), format_full(rep.truncationRate)});
    }
    w.write(path);
}

int run_manifest(const ExperimentManifest& m) {
    try {
        const nlohmann::json pj = m.problem;
        FbsdeProblem p = problem_from_json(pj);
        BoundsOptions bopts;
        bopts.c1 = m.c1;

        if (m.mode == "bounds") {
            write_bounds_csv(compute_bounds(p, bopts), out_path(m, "bounds.csv"));
            return 0;
        }
        if (m.mode == "oracle") return run_oracle_mode(m);

        PicardConfig cfg = picard_of(m);

        if (m.mode == "solve-local") {
            LocalSolution sol =
                solve_local(p, TimeGrid::uniform(p.horizon, m.K), m.nPaths, m.seed, cfg);
            if (has_output(m, "report")) write_report_csv(sol.report, out_path(m, "report.csv"));
            if (has_output(m, "convergence"))
                emit_convergence_table({sol.report}, out_path(m, "convergence.csv"));
            if (has_output(m, "bounds"))
                write_bounds_csv(compute_bounds(p, bopts), out_path(m, "bounds.csv"));
            if (has_output(m, "trajectories"))
                write_trajectories_csv(sol.ensemble, out_path(m, "trajectories.csv"));
            if (!sol.report.converged) {
                std::cerr << "solver did not converge: " << sol.report.failure << "\n";
                return 2;
            }
            return check_expected(m, sol.report.y0Mean);
        }

        // solve-global
        const int K = m.perIntervalK > 0 ? m.perIntervalK : m.K;
        const double spread = m.designSpread > 0
                                  ? m.designSpread
                                  : 3.0 * p.constants.lambda2 * std::sqrt(p.horizon);
        GlobalSolution sol = solve_global(p, K, m.nPaths, m.seed, cfg, spread);
        if (has_output(m, "report")) write_report_csv(sol.report, out_path(m, "report.csv"));
        if (has_output(m, "convergence"))
            emit_convergence_table(sol.intervalReports.empty()
                                       ? std::vector<SolveReport>{sol.report}
                                       : sol.intervalReports,
                                   out_path(m, "convergence.csv"));
        if (has_output(m, "bounds"))
            write_bounds_csv(compute_bounds(p, bopts), out_path(m, "bounds.csv"));
        if (has_output(m, "trajectories"))
            write_trajectories_csv(sol.ensemble, out_path(m, "trajectories.csv"));
        if (has_output(m, "theta")) write_theta_csv(sol.field, p.dims, m);
        if (!sol.report.converged) {
            std::cerr << "solver did not converge: " << sol.report.failure << "\n";
            return 2;
        }
        return check_expected(m, sol.report.y0Mean);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_manifest(const std::string& path) {
    try {
        return run_manifest(manifest_from_file(path));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fbsde
