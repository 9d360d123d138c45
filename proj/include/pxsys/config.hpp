#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pxsys/mesh.hpp"
#include "pxsys/params.hpp"
#include "pxsys/pxlap.hpp"

namespace pxsys {

struct ExponentSpecConfig {
    bool is_constant = true;
    double constant = 2.0;
    std::vector<double> affine;  // c0, cx [, cy]

    ExponentField build(const Mesh& mesh) const;
    nlohmann::json to_json() const;
};

struct DomainConfig {
    std::string kind = "interval";  // interval | rectangle
    double a = 0.0, b = 1.0;        // interval endpoints
    double extent_x = 1.0, extent_y = 1.0;
    int n = 16;                     // interval resolution
    int nx = 8, ny = 8;

    Mesh build() const;
    nlohmann::json to_json() const;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    DomainConfig domain;
    ExponentSpecConfig p, q, alpha, beta;
    double gamma = 1.0;
    double theta = 1.0;
    Regime regime = Regime::I;
    std::vector<double> eps_schedule;  // regimes i-iii
    double eps0 = 0.5;
    std::vector<double> lambda_grid;   // regime T2
    double eps_t2 = 1e-3;
    SolverOptions solver;
    std::string out_dir = "out";
    bool write_fields = true;

    nlohmann::json to_json() const;
};

/// Parses and validates a scenario file. Unknown keys are errors (reported
/// with their JSON path); regime hypotheses are validated on the built mesh.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_json(const nlohmann::json& doc);

/// Materializes mesh + params from a config (mesh must outlive the params).
SystemParams build_params(const ScenarioConfig& cfg, const Mesh& mesh);

}  // namespace pxsys
