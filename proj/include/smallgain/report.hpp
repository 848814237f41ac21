#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smallgain/config.hpp"

namespace smallgain {

enum class Command {
    Validate,
    Intervals,
    Regions,
    CheckSgc,
    CheckLyapunov,
    CheckDpi,
    Simulate,
    FullReport
};

/// Parses a CLI command name ("report" maps to FullReport).
Command parse_command(std::string_view name);
std::string command_name(Command cmd);

struct ValidationSection {
    std::vector<std::pair<std::string, ValidationReport>> gains;  // field name, report
    StorageValidation v1;
    StorageValidation v2;
    double origin_residual = 0.0;
    std::vector<CheckReport> dpi_invariants;
    bool passed = false;
};

/// Everything one invocation computed. Sections are optional; a missing
/// section serializes as {"skipped": true} so reports are structurally
/// complete for every command.
struct Report {
    std::string tool_version;
    std::string timestamp;  // ISO 8601 UTC
    std::uint64_t config_hash = 0;
    nlohmann::json tolerances;  // resolved knobs echoed for interpretability

    std::optional<ValidationSection> validation;
    std::optional<SmallGainIntervals> intervals;
    std::optional<std::vector<RegionSpec>> regions;
    std::optional<std::vector<CheckReport>> sgc;
    std::optional<std::vector<CheckReport>> lyapunov;
    std::optional<std::vector<CheckReport>> dpi;
    std::optional<std::vector<Theorem1Report>> theorem1;
    std::optional<AissReport> aiss;

    int exit_code = 0;  // 0 clean, 2 violations found
};

/// Execute a command against a validated config. Operational failures throw;
/// check violations land in the report with exit_code 2. Validation always
/// runs first and gates every other stage (fail-fast).
Report run(Command cmd, const Config& config);

nlohmann::json report_to_json(const Report& report, bool include_timestamp = true);

/// Write report.json and/or the CSV artifacts into out_dir.
void write_outputs(const Report& report, const Config& config,
                   const std::filesystem::path& out_dir);

}  // namespace smallgain
