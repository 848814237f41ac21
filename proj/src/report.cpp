#include "smallgain/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "smallgain/detail/rng.hpp"
#include "smallgain/version.hpp"

namespace smallgain {

namespace {

using nlohmann::json;

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json to_json(const SmallGainInterval& iv) {
    return {{"lower", iv.lower},
            {"upper", finite_or_null(iv.upper)},
            {"upper_infinite", iv.upper_infinite()}};
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::UpperInfinite: return "UpperInfinite";
        case Termination::DivergentAbove: return "DivergentAbove";
        case Termination::OuterCap: return "OuterCap";
    }
    return "?";
}

json to_json(const SmallGainIntervals& result) {
    json intervals = json::array();
    for (const auto& iv : result.intervals) intervals.push_back(to_json(iv));
    json per_interval = json::array();
    for (const auto& d : result.diagnostics.per_interval) {
        per_interval.push_back({{"lower_iters", d.lower_iters},
                                {"upper_iters", d.upper_iters},
                                {"lower_converged", d.lower_converged},
                                {"upper_converged", d.upper_converged},
                                {"monotonicity_violations", d.monotonicity_violations}});
    }
    return {{"ell", result.ell()},
            {"intervals", intervals},
            {"terminated_by", termination_name(result.terminated_by)},
            {"any_unconverged", result.any_unconverged},
            {"diagnostics",
             {{"outer_iterations", result.diagnostics.outer_iterations},
              {"fixed_advances", result.diagnostics.fixed_advances},
              {"above_runs", result.diagnostics.above_runs},
              {"per_interval", per_interval}}}};
}

json to_json(const CheckReport& r) {
    json violations = json::array();
    for (const auto& v : r.violations) {
        violations.push_back(
            {{"point", v.point}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"margin", v.margin}});
    }
    return {{"name", r.name},
            {"checked_points", r.checked_points},
            {"skipped_points", r.skipped_points},
            {"violation_count", r.violation_count},
            {"violations", violations},
            {"min_margin", finite_or_null(r.min_margin)},
            {"notes", r.notes},
            {"passed", r.passed()}};
}

json to_json(const ValidationReport& r) {
    json violations = json::array();
    for (const auto& v : r.violations) {
        violations.push_back({{"kind", v.kind},
                              {"s_lo", v.s_lo},
                              {"s_hi", v.s_hi},
                              {"g_lo", v.g_lo},
                              {"g_hi", v.g_hi}});
    }
    json j = {{"passed", r.passed},
              {"zero_at_zero_ok", r.zero_at_zero_ok},
              {"strictly_increasing_ok", r.strictly_increasing_ok},
              {"g_at_zero", r.g_at_zero},
              {"g_at_s_max", finite_or_null(r.g_at_s_max)},
              {"s_max", r.s_max},
              {"grid_points", r.grid_points},
              {"violations", violations}};
    if (r.unboundedness_checked) {
        j["unboundedness_ok"] = r.unboundedness_ok;
        j["probe_threshold"] = finite_or_null(r.probe_threshold);
        j["unboundedness_note"] = "heuristic probe, not a proof of unboundedness";
    }
    return j;
}

json to_json(const StorageValidation& r) {
    return {{"passed", r.passed},
            {"zero_at_zero_ok", r.zero_at_zero_ok},
            {"v_at_zero", r.v_at_zero},
            {"nonpositive_points", r.nonpositive_points}};
}

json to_json(const RegionSpec& r) {
    return {{"k", r.k},
            {"a_threshold_v1", r.a_threshold_v1},
            {"a_threshold_v2", r.a_threshold_v2},
            {"b_threshold_v1", finite_or_null(r.b_threshold_v1)},
            {"b_threshold_v2", finite_or_null(r.b_threshold_v2)},
            {"b_infinite", r.b_infinite}};
}

json to_json(const Theorem1Report& r) {
    json levels = json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"sup_norm", l.sup_norm},
                          {"runs", l.runs},
                          {"converged", l.converged},
                          {"blowups", l.blowups},
                          {"escapes", l.escapes},
                          {"max_tail_distance", finite_or_null(l.max_tail_distance)},
                          {"skipped_by_delta", l.skipped_by_delta}});
    }
    json envelope = json::array();
    for (const auto& [u, radius] : r.radius_envelope) {
        envelope.push_back({{"sup_norm", u}, {"radius", radius}});
    }
    return {{"k", r.k},
            {"levels", levels},
            {"radius_envelope", envelope},
            {"fraction_within", r.fraction_within},
            {"notes", r.notes}};
}

json to_json(const AissReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"sup_norm", l.sup_norm},
                          {"runs", l.runs},
                          {"converged", l.converged},
                          {"blowups", l.blowups},
                          {"envelope", l.envelope}});
    }
    json points = json::array();
    for (const auto& [u, g] : r.empirical_gain_points) {
        points.push_back({{"sup_norm", u}, {"gain", g}});
    }
    json nonconverged = json::array();
    for (const auto& nc : r.nonconverged) {
        nonconverged.push_back({{"level_index", nc.level_index},
                                {"sup_norm", nc.sup_norm},
                                {"run_index", nc.run_index},
                                {"derived_seed", nc.derived_seed},
                                {"reason", nc.reason},
                                {"limsup", std::isnan(nc.limsup) ? json(nullptr)
                                                                 : json(nc.limsup)}});
    }
    return {{"n_runs", r.n_runs},
            {"fraction_converged", r.fraction_converged},
            {"empirical_gain_points", points},
            {"nonconverged", nonconverged},
            {"levels", levels},
            {"radius_cap", r.radius_cap},
            {"seed", r.seed},
            {"note", "empirical envelope over sampled runs, not the theorem's gain"}};
}

json to_json(const ValidationSection& v) {
    json gains = json::object();
    for (const auto& [name, rep] : v.gains) gains[name] = to_json(rep);
    json dpi = json::array();
    for (const auto& rep : v.dpi_invariants) dpi.push_back(to_json(rep));
    return {{"passed", v.passed},
            {"gains", gains},
            {"v1", to_json(v.v1)},
            {"v2", to_json(v.v2)},
            {"origin_residual", v.origin_residual},
            {"dpi_invariants", dpi}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json tolerances_echo(const Config& cfg) {
    const AlgorithmParams& a = cfg.algorithm;
    const VerifyConfig& v = cfg.verify;
    const AissParams& s = cfg.sim.aiss;
    return {{"algorithm",
             {{"delta", a.delta},
              {"eps_fix", a.eps_fix},
              {"eps_conv", a.eps_conv},
              {"s_divergence", a.s_divergence},
              {"max_inner_iters", a.max_inner_iters},
              {"max_outer_iters", a.max_outer_iters}}},
            {"verify",
             {{"sgc_samples", v.sgc_samples},
              {"sgc_infinite_probe", v.sgc_infinite_probe},
              {"a_k_inner_composition",
               v.a_k_inner_composition == InnerComposition::AsPrinted ? "as_printed"
                                                                      : "gamma21_gamma12"},
              {"gamma_band_tol", v.gamma_band_tol},
              {"kinf_grid_points", v.kinf_grid_points},
              {"lyapunov_fd_step", v.lyapunov.fd_step},
              {"lyapunov_fd_slack", v.lyapunov.fd_slack},
              {"lyapunov_nondiff_tol", v.lyapunov.nondiff_tol},
              {"dpi_fd_step", v.dpi.fd_step},
              {"dpi_fd_slack", v.dpi.fd_slack}}},
            {"sim",
             {{"n_runs", s.n_runs},
              {"t_end", s.t_end},
              {"h", s.h},
              {"seed", s.seed},
              {"tail_fraction", s.tail_fraction},
              {"blowup_threshold", s.blowup_threshold},
              {"radius_cap", s.radius_cap},
              {"aiss_pass_fraction", cfg.sim.aiss_pass_fraction},
              {"theorem1_pass_fraction", cfg.sim.theorem1_pass_fraction}}}};
}

ValidationSection run_validation(const Config& cfg) {
    const InterconnectionSpec& sys = cfg.system();
    ValidationSection out;
    const std::size_t grid = cfg.verify.kinf_grid_points;
    out.gains.emplace_back("gamma12", validate_kinf(sys.gamma12(), grid));
    out.gains.emplace_back("gamma21", validate_kinf(sys.gamma21(), grid));
    out.gains.emplace_back("gamma1", validate_kinf(sys.gamma1(), grid));
    out.gains.emplace_back("gamma2", validate_kinf(sys.gamma2(), grid));
    out.gains.emplace_back("alpha1", validate_kinf(sys.alpha1(), grid));
    out.gains.emplace_back("alpha2", validate_kinf(sys.alpha2(), grid));
    for (const DpiBlock& b : sys.dpi_blocks()) {
        out.gains.emplace_back("dpi_blocks[k=" + std::to_string(b.k) + "].gamma_k",
                               validate_kinf(b.gamma_k, grid));
    }

    Box box1(sys.n1()), box2(sys.n2());
    for (std::size_t a = 0; a < sys.n1(); ++a) box1[a] = cfg.verify.lyapunov.x_box[a];
    for (std::size_t a = 0; a < sys.n2(); ++a) {
        box2[a] = cfg.verify.lyapunov.x_box[sys.n1() + a];
    }
    out.v1 = validate_storage(sys.v1(), box1, cfg.verify.storage_samples,
                              cfg.verify.storage_seed);
    out.v2 = validate_storage(sys.v2(), box2, cfg.verify.storage_samples,
                              detail::derive_seed(cfg.verify.storage_seed, 2));
    out.origin_residual = sys.origin_residual();

    for (const DpiBlock& b : sys.dpi_blocks()) {
        out.dpi_invariants.push_back(
            check_dpi_block_invariants(sys, b, cfg.verify.dpi.grid));
    }

    out.passed = out.v1.passed && out.v2.passed && out.origin_residual <= 1e-9;
    for (const auto& [name, rep] : out.gains) out.passed = out.passed && rep.passed;
    for (const auto& rep : out.dpi_invariants) out.passed = out.passed && rep.passed();
    return out;
}

std::vector<CheckReport> run_sgc(const Config& cfg, const SmallGainIntervals& intervals) {
    const InterconnectionSpec& sys = cfg.system();
    std::vector<CheckReport> out;
    for (std::size_t k = 1; k <= intervals.ell(); ++k) {
        const SmallGainInterval& iv = intervals.intervals[k - 1];
        double hi = iv.upper;
        CheckReport rep;
        if (iv.upper_infinite()) {
            hi = iv.lower + cfg.verify.sgc_infinite_probe;
            rep = check_sgc_on_interval(sys.gamma12(), sys.gamma21(), {iv.lower, hi},
                                        cfg.verify.sgc_samples);
            rep.notes.push_back("infinite upper endpoint clipped to " + std::to_string(hi));
        } else {
            rep = check_sgc_on_interval(sys.gamma12(), sys.gamma21(), {iv.lower, hi},
                                        cfg.verify.sgc_samples);
        }
        rep.name = "sgc_k" + std::to_string(k);
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<RegionSpec> run_regions(const Config& cfg, const SmallGainIntervals& intervals) {
    const InterconnectionSpec& sys = cfg.system();
    std::vector<RegionSpec> out;
    for (std::size_t k = 1; k <= intervals.ell(); ++k) {
        out.push_back(build_region(k, intervals, sys.gamma12(), sys.gamma21(),
                                   cfg.verify.a_k_inner_composition));
    }
    return out;
}

std::vector<CheckReport> run_dpi(const Config& cfg, const SmallGainIntervals& intervals,
                                 const std::vector<RegionSpec>& regions) {
    const InterconnectionSpec& sys = cfg.system();
    std::vector<CheckReport> out;
    std::vector<std::size_t> ks;  // distinct block indices in first-seen order
    for (const DpiBlock& b : sys.dpi_blocks()) {
        out.push_back(check_dpi(sys, b, cfg.verify.dpi));
        if (std::find(ks.begin(), ks.end(), b.k) == ks.end()) ks.push_back(b.k);
    }

    // Containment is a per-k property of the union of that k's boxes.
    for (std::size_t k : ks) {
        std::vector<Box> boxes;
        for (const DpiBlock& b : sys.dpi_blocks()) {
            if (b.k == k) boxes.push_back(b.domain_box);
        }
        std::optional<RegionSpec> a_region, b_prev;
        bool defined = true;
        if (k <= intervals.ell()) {
            a_region = regions[k - 1];
        } else if (k != intervals.ell() + 1) {
            defined = false;  // beyond the located intervals
        }
        if (k >= 2) {
            if (k - 1 <= intervals.ell()) {
                b_prev = regions[k - 2];
            } else {
                defined = false;
            }
        }
        if (defined) {
            out.push_back(check_dpi_containment(sys, k, boxes, a_region, b_prev,
                                                cfg.verify.dpi_containment_samples,
                                                cfg.verify.dpi_containment_inflate,
                                                cfg.verify.dpi_containment_seed));
        } else {
            CheckReport skip;
            skip.name = "dpi_containment_k" + std::to_string(k);
            skip.notes.push_back("containment undefined: block index exceeds ell + 1");
            out.push_back(std::move(skip));
        }
    }
    return out;
}

}  // namespace

Command parse_command(std::string_view name) {
    if (name == "validate") return Command::Validate;
    if (name == "intervals") return Command::Intervals;
    if (name == "regions") return Command::Regions;
    if (name == "check-sgc") return Command::CheckSgc;
    if (name == "check-lyapunov") return Command::CheckLyapunov;
    if (name == "check-dpi") return Command::CheckDpi;
    if (name == "simulate") return Command::Simulate;
    if (name == "report") return Command::FullReport;
    throw Error("unknown command: " + std::string(name));
}

std::string command_name(Command cmd) {
    switch (cmd) {
        case Command::Validate: return "validate";
        case Command::Intervals: return "intervals";
        case Command::Regions: return "regions";
        case Command::CheckSgc: return "check-sgc";
        case Command::CheckLyapunov: return "check-lyapunov";
        case Command::CheckDpi: return "check-dpi";
        case Command::Simulate: return "simulate";
        case Command::FullReport: return "report";
    }
    return "?";
}

Report run(Command cmd, const Config& cfg) {
    const InterconnectionSpec& sys = cfg.system();
    Report report;
    report.tool_version = kVersion;
    report.timestamp = utc_timestamp();
    report.config_hash = cfg.hash;
    report.tolerances = tolerances_echo(cfg);

    report.validation = run_validation(cfg);
    if (!report.validation->passed) {
        report.exit_code = 2;  // invalid certificates gate all computation
        return report;
    }
    if (cmd == Command::Validate) return report;

    const bool needs_intervals = cmd != Command::CheckLyapunov;
    if (needs_intervals) {
        report.intervals = find_intervals(sys.gamma12(), sys.gamma21(), cfg.algorithm);
    }

    const bool needs_regions = cmd == Command::Regions || cmd == Command::CheckDpi ||
                               cmd == Command::FullReport;
    if (needs_regions) {
        report.regions = run_regions(cfg, *report.intervals);
    }

    if (cmd == Command::CheckSgc || cmd == Command::FullReport) {
        report.sgc = run_sgc(cfg, *report.intervals);
    }
    if (cmd == Command::CheckLyapunov || cmd == Command::FullReport) {
        report.lyapunov = {check_iss_lyapunov(sys, 1, cfg.verify.lyapunov),
                           check_iss_lyapunov(sys, 2, cfg.verify.lyapunov)};
    }
    if (cmd == Command::CheckDpi || cmd == Command::FullReport) {
        report.dpi = run_dpi(cfg, *report.intervals, *report.regions);
    }
    if (cmd == Command::Simulate || cmd == Command::FullReport) {
        std::vector<std::size_t> ks = cfg.sim.theorem1_ks;
        if (ks.empty()) {
            for (std::size_t k = 1; k <= report.intervals->ell(); ++k) ks.push_back(k);
        }
        std::vector<Theorem1Report> t1;
        for (std::size_t k : ks) {
            t1.push_back(check_theorem1(sys, *report.intervals, k, cfg.sim.theorem1));
        }
        report.theorem1 = std::move(t1);
        report.aiss = monte_carlo_aiss(sys, cfg.sim.aiss);
    }

    bool violations = false;
    auto scan = [&](const std::optional<std::vector<CheckReport>>& sec) {
        if (!sec) return;
        for (const CheckReport& r : *sec) violations = violations || !r.passed();
    };
    scan(report.sgc);
    scan(report.lyapunov);
    scan(report.dpi);
    if (report.theorem1) {
        for (const Theorem1Report& r : *report.theorem1) {
            violations = violations || r.fraction_within < cfg.sim.theorem1_pass_fraction;
        }
    }
    if (report.aiss) {
        violations =
            violations || report.aiss->fraction_converged < cfg.sim.aiss_pass_fraction;
    }
    report.exit_code = violations ? 2 : 0;
    return report;
}

json report_to_json(const Report& report, bool include_timestamp) {
    json j;
    j["provenance"] = {{"tool", "smallgain"},
                       {"version", report.tool_version},
                       {"config_hash", report.config_hash},
                       {"tolerances", report.tolerances}};
    if (include_timestamp) j["provenance"]["timestamp"] = report.timestamp;

    const json skipped = {{"skipped", true}};
    j["validation"] = report.validation ? to_json(*report.validation) : skipped;
    j["intervals"] = report.intervals ? to_json(*report.intervals) : skipped;
    if (report.regions) {
        json arr = json::array();
        for (const auto& r : *report.regions) arr.push_back(to_json(r));
        j["regions"] = arr;
    } else {
        j["regions"] = skipped;
    }
    auto emit_checks = [&](const char* key,
                           const std::optional<std::vector<CheckReport>>& sec) {
        if (sec) {
            json arr = json::array();
            for (const auto& r : *sec) arr.push_back(to_json(r));
            j["checks"][key] = arr;
        } else {
            j["checks"][key] = skipped;
        }
    };
    emit_checks("sgc", report.sgc);
    emit_checks("lyapunov", report.lyapunov);
    emit_checks("dpi", report.dpi);
    if (report.theorem1) {
        json arr = json::array();
        for (const auto& r : *report.theorem1) arr.push_back(to_json(r));
        j["theorem1"] = arr;
    } else {
        j["theorem1"] = skipped;
    }
    j["aiss"] = report.aiss ? to_json(*report.aiss) : skipped;
    j["exit_code"] = report.exit_code;
    return j;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_gain_curves(const Config& cfg, const Report& report,
                       const std::filesystem::path& path) {
    const InterconnectionSpec& sys = cfg.system();
    double s_hi = 10.0;
    if (report.intervals) {
        for (const auto& iv : report.intervals->intervals) {
            if (!iv.upper_infinite()) s_hi = std::max(s_hi, 1.25 * iv.upper);
            s_hi = std::max(s_hi, 1.25 * iv.lower);
        }
    }
    std::string csv = "s,gamma21,gamma12_inv\n";
    const std::size_t points = 512;
    for (std::size_t i = 0; i <= points; ++i) {
        const double s = s_hi * static_cast<double>(i) / static_cast<double>(points);
        csv += fmt(s);
        csv += ',';
        csv += fmt(sys.gamma21()(s));
        csv += ',';
        try {
            csv += fmt(invert(sys.gamma12(), s));
        } catch (const UnreachableError&) {
            csv += "nan";
        }
        csv += '\n';
    }
    write_text(path, csv);
}

void write_sample_trajectories(const Config& cfg, const std::filesystem::path& dir) {
    const InterconnectionSpec& sys = cfg.system();
    const AissParams& p = cfg.sim.aiss;
    for (std::size_t li = 0; li < p.u_levels.size(); ++li) {
        // Reproduce run 0 of this level from its derived seed.
        const std::uint64_t run_seed = detail::derive_seed(p.seed, li, 0);
        std::mt19937_64 rng(run_seed);
        std::vector<double> x0(sys.n());
        for (std::size_t a = 0; a < sys.n(); ++a) {
            std::uniform_real_distribution<double> dist(p.ic_box[a].first, p.ic_box[a].second);
            x0[a] = dist(rng);
        }
        InputSignal u = InputSignal::zero(sys.m());
        if (p.u_levels[li] > 0.0 && sys.m() > 0) {
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::vector<double> dir(sys.m());
            double norm = 0.0;
            while (norm == 0.0) {
                for (auto& c : dir) c = gauss(rng);
                norm = 0.0;
                for (double c : dir) norm += c * c;
                norm = std::sqrt(norm);
            }
            for (auto& c : dir) c *= p.u_levels[li] / norm;
            switch (p.u_kind) {
                case InputKind::Sinusoid:
                    u = InputSignal::sinusoid(dir, p.sin_frequency, 0.0);
                    break;
                case InputKind::PiecewiseConstantRandom:
                    u = InputSignal::piecewise_constant_random(p.u_levels[li], p.pcr_dwell,
                                                               run_seed, sys.m());
                    break;
                default:
                    u = InputSignal::constant(dir);
                    break;
            }
        }
        Trajectory traj = integrate(sys, x0, u, p.t_end, p.h, p.blowup_threshold);
        std::ofstream out(dir / ("trajectory_level" + std::to_string(li) + ".csv"));
        if (!out) throw IoError("cannot write trajectory csv");
        write_trajectory_csv(traj, out);
    }
}

}  // namespace

void write_outputs(const Report& report, const Config& cfg,
                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (cfg.output.json) {
        write_text(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    }
    if (!cfg.output.csv) return;

    write_gain_curves(cfg, report, out_dir / "gain_curves.csv");
    if (report.intervals) {
        std::string csv = "k,lower,upper\n";
        std::size_t k = 1;
        for (const auto& iv : report.intervals->intervals) {
            csv += std::to_string(k++) + "," + fmt(iv.lower) + "," +
                   (iv.upper_infinite() ? "inf" : fmt(iv.upper)) + "\n";
        }
        write_text(out_dir / "intervals.csv", csv);
    }
    if (report.aiss) {
        std::string csv = "sup_norm,envelope\n";
        for (const auto& [u, g] : report.aiss->empirical_gain_points) {
            csv += fmt(u) + "," + fmt(g) + "\n";
        }
        write_text(out_dir / "aiss_envelope.csv", csv);
        write_sample_trajectories(cfg, out_dir);
    }
}

}  // namespace smallgain
