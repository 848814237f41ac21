#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "smallgain/kernels.hpp"
#include "smallgain/report.hpp"
#include "smallgain/version.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("SMALLGAIN_LOG");
    if (env == nullptr) return 1;  // warn
    const std::string v(env);
    if (v == "off") return -1;
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[smallgain] %s\n", msg.c_str());
}

void emit_error(const std::string& type, const std::string& message) {
    nlohmann::json err = {{"error", type}, {"message", message}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-gain interval analysis, hypothesis verification, and "
                 "Monte-Carlo validation for feedback interconnections"};
    app.set_version_flag("--version", smallgain::kVersion);

    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("command", command,
                   "validate|intervals|regions|check-sgc|check-lyapunov|check-dpi|"
                   "simulate|report")
        ->required();
    app.add_option("--config", config_path, "path to the JSON configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--format", format, "json|csv|both (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "simulation seed (overrides config)");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        const smallgain::Command cmd = smallgain::parse_command(command);
        smallgain::Config cfg = smallgain::Config::load(config_path);
        if (seed_set) {
            cfg.sim.aiss.seed = seed;
            cfg.sim.theorem1.seed = seed;
        }
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        if (!format.empty()) {
            if (format == "json") {
                cfg.output.json = true;
                cfg.output.csv = false;
            } else if (format == "csv") {
                cfg.output.json = false;
                cfg.output.csv = true;
            } else if (format == "both") {
                cfg.output.json = true;
                cfg.output.csv = true;
            } else {
                throw smallgain::Error("unknown format: " + format);
            }
        }

        log_info("kernel backend: " +
                 smallgain::kernels::backend_name(smallgain::kernels::active_backend()));
        log_info("running '" + command + "'");

        smallgain::Report report = smallgain::run(cmd, cfg);
        smallgain::write_outputs(report, cfg, cfg.output.directory);
        std::cout << smallgain::report_to_json(report).dump(2) << std::endl;
        return report.exit_code;
    } catch (const smallgain::SchemaError& e) {
        emit_error("schema", e.what());
    } catch (const smallgain::IoError& e) {
        emit_error("io", e.what());
    } catch (const smallgain::Error& e) {
        emit_error("operational", e.what());
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
    }
    return 1;
}
