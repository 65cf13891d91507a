#pragma once

#include <string>

#include "fbsde/model.hpp"
#include "json.hpp"

namespace fbsde {

/// Builds a problem from a JSON object. Two forms:
///   { "builtin": "martingale", "params": { "T": 1.0 } }
///   { "dims": {"m":1,"l":1,"d":1}, "horizon": 1.0, "x0": [0.0],
///     "b": ["y1"], "sigma": [["1"]], "g": ["x1"], "h": ["tanh(x1)"],
///     "gShape": "diagonal",
///     "constants": { "k1": 0, ..., "rho": {"kind":"power","c":1,"p":2},
///                    "A": [[0]], "qIntegrals": [[0]] } }
/// Coefficient entries are expression strings over t, x1.., y1.., z11..
/// Throws std::invalid_argument with field context on schema violations.
FbsdeProblem problem_from_json(const nlohmann::json& j);

FbsdeProblem problem_from_file(const std::string& path);

}  // namespace fbsde
