#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "smallgain/sim.hpp"
#include "smallgain/system.hpp"
#include "smallgain/verify.hpp"

namespace smallgain {

struct VerifyConfig {
    std::size_t sgc_samples = 100;
    double sgc_infinite_probe = 10.0;  // probe span past the lower endpoint
    InnerComposition a_k_inner_composition = InnerComposition::AsPrinted;
    double gamma_band_tol = 1e-9;
    std::size_t kinf_grid_points = 512;
    std::size_t storage_samples = 512;
    std::uint64_t storage_seed = 7;
    LyapunovCheckParams lyapunov;
    DpiCheckParams dpi;
    std::size_t dpi_containment_samples = 2000;
    double dpi_containment_inflate = 1.5;
    std::uint64_t dpi_containment_seed = 11;
};

struct SimConfig {
    AissParams aiss;
    double aiss_pass_fraction = 1.0;
    Theorem1Params theorem1;
    double theorem1_pass_fraction = 1.0;
    std::vector<std::size_t> theorem1_ks;  // empty: every located interval
};

struct OutputConfig {
    std::string directory = "out";
    bool json = true;
    bool csv = true;
};

/// Fully validated configuration: schema checked, every expression parsed
/// eagerly, and the interconnection constructed, so errors surface before any
/// computation starts.
class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config from_json(const nlohmann::json& j);

    const InterconnectionSpec& system() const { return *system_; }

    AlgorithmParams algorithm;
    VerifyConfig verify;
    SimConfig sim;
    OutputConfig output;

    /// Canonical serialized form (defaults resolved) and its FNV-1a hash,
    /// echoed into report provenance.
    std::string canonical;
    std::uint64_t hash = 0;

private:
    Config() = default;
    std::optional<InterconnectionSpec> system_;
};

}  // namespace smallgain
