#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pxsys/config.hpp"

namespace pxsys {

struct RunReport {
    nlohmann::json doc;
    int exit_code = 0;  // 0 ok, 2 hypothesis, 3 certification, 4 diverged, 5 verification
};

/// Full pipeline for one scenario: validate -> box + epsilon continuation
/// (regimes i-iii) or lambda continuation (T2) -> verification suite.
/// Failures are embedded in the report, never thrown.
RunReport run_scenario(const ScenarioConfig& cfg);

/// Independent runs over values of one parameter (gamma | theta | resolution),
/// fanned out over `jobs` workers, plus a summary table.
struct SweepResult {
    std::vector<RunReport> runs;
    nlohmann::json summary;
};
SweepResult sweep(const ScenarioConfig& cfg, const std::string& parameter,
                  const std::vector<double>& values, int jobs);

/// Brute-force comparison on a (shrunken) copy of the scenario mesh.
RunReport run_oracle(const ScenarioConfig& cfg);

/// Atomic write: temp file + rename.
void write_text_atomic(const std::string& path, const std::string& contents);
void write_report_files(const RunReport& report, const ScenarioConfig& cfg);

int exit_code_for(ErrorKind kind);

}  // namespace pxsys
