#include "smallgain/config.hpp"

#include <fstream>

namespace smallgain {

namespace {

using nlohmann::json;

const json& member(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing required field");
    return *it;
}

const json* member_opt(const json& j, const std::string& path, const std::string& key) {
    if (j.is_null()) return nullptr;
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw SchemaError(path, "expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

double get_double(const json& j, const std::string& path, const std::string& key,
                  double fallback) {
    const json* v = member_opt(j, path, key);
    return v ? as_double(*v, path + "." + key) : fallback;
}

std::size_t get_count(const json& j, const std::string& path, const std::string& key,
                      std::size_t fallback) {
    const json* v = member_opt(j, path, key);
    return v ? as_count(*v, path + "." + key) : fallback;
}

std::uint64_t get_seed(const json& j, const std::string& path, const std::string& key,
                       std::uint64_t fallback) {
    const json* v = member_opt(j, path, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !v->is_number_integer()) {
        throw SchemaError(path + "." + key, "expected an integer seed");
    }
    return v->get<std::uint64_t>();
}

Expr parse_expr(const json& j, const std::string& path,
                const std::vector<std::string>& schema) {
    const std::string text = as_string(j, path);
    try {
        return Expr::parse(text, schema);
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
}

ComparisonFn parse_gain(const json& j, const std::string& path, FnClass default_class) {
    std::string text;
    FnClass cls = default_class;
    double s_max = 1e7;
    std::optional<double> probe;
    if (j.is_string()) {
        text = j.get<std::string>();
    } else if (j.is_object()) {
        text = as_string(member(j, path, "expr"), path + ".expr");
        if (const json* c = member_opt(j, path, "class")) {
            const std::string s = as_string(*c, path + ".class");
            if (s == "K") {
                cls = FnClass::K;
            } else if (s == "K_inf" || s == "Kinf" || s == "K_infinity") {
                cls = FnClass::KInf;
            } else {
                throw SchemaError(path + ".class", "expected \"K\" or \"K_inf\"");
            }
        }
        s_max = get_double(j, path, "s_max", s_max);
        if (const json* p = member_opt(j, path, "probe_threshold")) {
            probe = as_double(*p, path + ".probe_threshold");
        }
    } else {
        throw SchemaError(path, "expected an expression string or {expr, class, s_max}");
    }
    try {
        ComparisonFn fn(Expr::parse(text, {"s"}), cls, s_max);
        if (probe) fn.set_probe_threshold(*probe);
        return fn;
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
}

Box parse_box(const json& j, const std::string& path, std::size_t expected) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of [lo, hi] pairs");
    Box box;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& pair = j[i];
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!pair.is_array() || pair.size() != 2) throw SchemaError(p, "expected [lo, hi]");
        const double lo = as_double(pair[0], p + "[0]");
        const double hi = as_double(pair[1], p + "[1]");
        if (!(lo <= hi)) throw SchemaError(p, "requires lo <= hi");
        box.push_back({lo, hi});
    }
    if (box.size() != expected) {
        throw SchemaError(path, "expected " + std::to_string(expected) + " axis pairs, got " +
                                    std::to_string(box.size()));
    }
    return box;
}

Box default_box(std::size_t axes, double lo, double hi) {
    return Box(axes, {lo, hi});
}

std::vector<Expr> parse_field(const json& j, const std::string& path, std::size_t expected,
                              const std::vector<std::string>& schema) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of expression strings");
    if (j.size() != expected) {
        throw SchemaError(path, "expected " + std::to_string(expected) + " components, got " +
                                    std::to_string(j.size()));
    }
    std::vector<Expr> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_expr(j[i], path + "[" + std::to_string(i) + "]", schema));
    }
    return out;
}

InputKind parse_kind(const json& j, const std::string& path) {
    const std::string s = as_string(j, path);
    if (s == "zero") return InputKind::Zero;
    if (s == "constant") return InputKind::Constant;
    if (s == "sinusoid") return InputKind::Sinusoid;
    if (s == "piecewise") return InputKind::PiecewiseConstantRandom;
    throw SchemaError(path, "expected zero|constant|sinusoid|piecewise");
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

Config Config::from_json(const json& root) {
    Config cfg;
    const json& problem = member(root, "$", "problem");
    const std::string pp = "$.problem";

    const std::size_t n1 = as_count(member(problem, pp, "n1"), pp + ".n1");
    const std::size_t n2 = as_count(member(problem, pp, "n2"), pp + ".n2");
    const std::size_t m1 = as_count(member(problem, pp, "m1"), pp + ".m1");
    const std::size_t m2 = as_count(member(problem, pp, "m2"), pp + ".m2");
    if (n1 == 0 || n2 == 0) throw SchemaError(pp, "subsystem dimensions must be positive");
    const std::size_t n = n1 + n2;
    const std::size_t m = m1 + m2;

    std::vector<Expr> f1 =
        parse_field(member(problem, pp, "f1"), pp + ".f1", n1, field_schema(n, 0, m1));
    std::vector<Expr> f2 =
        parse_field(member(problem, pp, "f2"), pp + ".f2", n2, field_schema(n, m1, m));

    Expr v1_body = parse_expr(member(problem, pp, "v1"), pp + ".v1", storage_schema(0, n1));
    Expr v2_body = parse_expr(member(problem, pp, "v2"), pp + ".v2", storage_schema(n1, n2));

    ComparisonFn gamma12 = parse_gain(member(problem, pp, "gamma12"), pp + ".gamma12",
                                      FnClass::KInf);
    ComparisonFn gamma21 = parse_gain(member(problem, pp, "gamma21"), pp + ".gamma21",
                                      FnClass::KInf);
    ComparisonFn gamma1 = parse_gain(member(problem, pp, "gamma1"), pp + ".gamma1",
                                     FnClass::KInf);
    ComparisonFn gamma2 = parse_gain(member(problem, pp, "gamma2"), pp + ".gamma2",
                                     FnClass::KInf);
    ComparisonFn alpha1 = parse_gain(member(problem, pp, "alpha1"), pp + ".alpha1",
                                     FnClass::KInf);
    ComparisonFn alpha2 = parse_gain(member(problem, pp, "alpha2"), pp + ".alpha2",
                                     FnClass::KInf);

    std::vector<DpiBlock> blocks;
    if (const json* dpi = member_opt(problem, pp, "dpi_blocks")) {
        if (!dpi->is_array()) throw SchemaError(pp + ".dpi_blocks", "expected an array");
        for (std::size_t i = 0; i < dpi->size(); ++i) {
            const json& b = (*dpi)[i];
            const std::string bp = pp + ".dpi_blocks[" + std::to_string(i) + "]";
            const std::size_t k = as_count(member(b, bp, "k"), bp + ".k");
            Expr rho = parse_expr(member(b, bp, "rho"), bp + ".rho", state_names(n));
            Expr q = parse_expr(member(b, bp, "q"), bp + ".q", state_names(n));
            ComparisonFn gk = parse_gain(member(b, bp, "gamma_k"), bp + ".gamma_k", FnClass::K);
            Box box = parse_box(member(b, bp, "domain_box"), bp + ".domain_box", n);
            try {
                blocks.emplace_back(k, std::move(rho), std::move(q), std::move(gk),
                                    std::move(box));
            } catch (const Error& e) {
                throw SchemaError(bp, e.what());
            }
        }
    }

    try {
        cfg.system_.emplace(n1, n2, m1, m2, std::move(f1), std::move(f2),
                            StorageFn(std::move(v1_body), n1), StorageFn(std::move(v2_body), n2),
                            std::move(gamma12), std::move(gamma21), std::move(gamma1),
                            std::move(gamma2), std::move(alpha1), std::move(alpha2),
                            std::move(blocks));
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(pp, e.what());
    }

    // Algorithm knobs.
    const json* alg = member_opt(root, "$", "algorithm");
    const json alg_empty = json::object();
    const json& a = alg ? *alg : alg_empty;
    cfg.algorithm.delta = get_double(a, "$.algorithm", "delta", cfg.algorithm.delta);
    cfg.algorithm.eps_fix = get_double(a, "$.algorithm", "eps_fix", cfg.algorithm.eps_fix);
    cfg.algorithm.eps_conv = get_double(a, "$.algorithm", "eps_conv", cfg.algorithm.eps_conv);
    cfg.algorithm.s_divergence =
        get_double(a, "$.algorithm", "s_divergence", cfg.algorithm.s_divergence);
    cfg.algorithm.max_inner_iters =
        get_count(a, "$.algorithm", "max_inner_iters", cfg.algorithm.max_inner_iters);
    cfg.algorithm.max_outer_iters =
        get_count(a, "$.algorithm", "max_outer_iters", cfg.algorithm.max_outer_iters);
    try {
        cfg.algorithm.validate();
    } catch (const Error& e) {
        throw SchemaError("$.algorithm", e.what());
    }

    // Verification knobs.
    const json* ver = member_opt(root, "$", "verify");
    const json& v = ver ? *ver : alg_empty;
    const std::string vp = "$.verify";
    cfg.verify.sgc_samples = get_count(v, vp, "sgc_samples", cfg.verify.sgc_samples);
    cfg.verify.sgc_infinite_probe =
        get_double(v, vp, "sgc_infinite_probe", cfg.verify.sgc_infinite_probe);
    if (const json* comp = member_opt(v, vp, "a_k_inner_composition")) {
        const std::string s = as_string(*comp, vp + ".a_k_inner_composition");
        if (s == "as_printed") {
            cfg.verify.a_k_inner_composition = InnerComposition::AsPrinted;
        } else if (s == "gamma21_gamma12") {
            cfg.verify.a_k_inner_composition = InnerComposition::Gamma21Gamma12;
        } else {
            throw SchemaError(vp + ".a_k_inner_composition",
                              "expected as_printed|gamma21_gamma12");
        }
    }
    cfg.verify.gamma_band_tol = get_double(v, vp, "gamma_band_tol", cfg.verify.gamma_band_tol);
    cfg.verify.kinf_grid_points =
        get_count(v, vp, "kinf_grid_points", cfg.verify.kinf_grid_points);
    cfg.verify.storage_samples =
        get_count(v, vp, "storage_samples", cfg.verify.storage_samples);
    cfg.verify.storage_seed = get_seed(v, vp, "storage_seed", cfg.verify.storage_seed);

    const json* lyap = member_opt(v, vp, "lyapunov");
    const json& ly = lyap ? *lyap : alg_empty;
    const std::string lp = vp + ".lyapunov";
    cfg.verify.lyapunov.samples = get_count(ly, lp, "samples", cfg.verify.lyapunov.samples);
    cfg.verify.lyapunov.x_box = member_opt(ly, lp, "x_box")
                                    ? parse_box(*member_opt(ly, lp, "x_box"), lp + ".x_box", n)
                                    : default_box(n, -2.0, 2.0);
    cfg.verify.lyapunov.u_box = member_opt(ly, lp, "u_box")
                                    ? parse_box(*member_opt(ly, lp, "u_box"), lp + ".u_box", m)
                                    : default_box(m, 0.0, 0.0);
    cfg.verify.lyapunov.fd_step = get_double(ly, lp, "fd_step", cfg.verify.lyapunov.fd_step);
    cfg.verify.lyapunov.fd_slack = get_double(ly, lp, "fd_slack", cfg.verify.lyapunov.fd_slack);
    cfg.verify.lyapunov.nondiff_tol =
        get_double(ly, lp, "nondiff_tol", 1000.0 * cfg.verify.lyapunov.fd_step);
    cfg.verify.lyapunov.seed = get_seed(ly, lp, "seed", cfg.verify.lyapunov.seed);

    const json* dpi = member_opt(v, vp, "dpi");
    const json& dp = dpi ? *dpi : alg_empty;
    const std::string dpp = vp + ".dpi";
    cfg.verify.dpi.grid.assign(n, 32);
    if (const json* grid = member_opt(dp, dpp, "grid")) {
        if (!grid->is_array()) throw SchemaError(dpp + ".grid", "expected per-axis counts");
        cfg.verify.dpi.grid.clear();
        for (std::size_t i = 0; i < grid->size(); ++i) {
            cfg.verify.dpi.grid.push_back(
                as_count((*grid)[i], dpp + ".grid[" + std::to_string(i) + "]"));
        }
        if (cfg.verify.dpi.grid.size() != n) {
            throw SchemaError(dpp + ".grid", "expected " + std::to_string(n) + " axis counts");
        }
    }
    cfg.verify.dpi.fd_step = get_double(dp, dpp, "fd_step", cfg.verify.dpi.fd_step);
    cfg.verify.dpi.fd_slack = get_double(dp, dpp, "fd_slack", cfg.verify.dpi.fd_slack);
    cfg.verify.dpi.u_values = {std::vector<double>(m, 0.0)};
    if (const json* uv = member_opt(dp, dpp, "u_values")) {
        if (!uv->is_array()) throw SchemaError(dpp + ".u_values", "expected an array");
        cfg.verify.dpi.u_values.clear();
        for (std::size_t i = 0; i < uv->size(); ++i) {
            const json& one = (*uv)[i];
            const std::string up = dpp + ".u_values[" + std::to_string(i) + "]";
            if (!one.is_array() || one.size() != m) {
                throw SchemaError(up, "expected " + std::to_string(m) + " components");
            }
            std::vector<double> vec;
            for (std::size_t c = 0; c < m; ++c) {
                vec.push_back(as_double(one[c], up + "[" + std::to_string(c) + "]"));
            }
            cfg.verify.dpi.u_values.push_back(std::move(vec));
        }
    }
    cfg.verify.dpi_containment_samples =
        get_count(dp, dpp, "containment_samples", cfg.verify.dpi_containment_samples);
    cfg.verify.dpi_containment_inflate =
        get_double(dp, dpp, "containment_inflate", cfg.verify.dpi_containment_inflate);
    cfg.verify.dpi_containment_seed =
        get_seed(dp, dpp, "containment_seed", cfg.verify.dpi_containment_seed);

    // Simulation knobs.
    const json* simj = member_opt(root, "$", "sim");
    const json& s = simj ? *simj : alg_empty;
    const std::string sp = "$.sim";
    AissParams& aiss = cfg.sim.aiss;
    aiss.n_runs = get_count(s, sp, "n_runs", aiss.n_runs);
    aiss.ic_box = member_opt(s, sp, "ic_box")
                      ? parse_box(*member_opt(s, sp, "ic_box"), sp + ".ic_box", n)
                      : default_box(n, -2.0, 2.0);
    if (const json* levels = member_opt(s, sp, "u_levels")) {
        if (!levels->is_array()) throw SchemaError(sp + ".u_levels", "expected an array");
        aiss.u_levels.clear();
        for (std::size_t i = 0; i < levels->size(); ++i) {
            const double lvl = as_double((*levels)[i], sp + ".u_levels[" + std::to_string(i) + "]");
            if (lvl < 0.0) throw SchemaError(sp + ".u_levels", "levels must be nonnegative");
            aiss.u_levels.push_back(lvl);
        }
    }
    if (const json* kind = member_opt(s, sp, "u_kind")) {
        aiss.u_kind = parse_kind(*kind, sp + ".u_kind");
    }
    aiss.sin_frequency = get_double(s, sp, "sin_frequency", aiss.sin_frequency);
    aiss.pcr_dwell = get_double(s, sp, "pcr_dwell", aiss.pcr_dwell);
    aiss.t_end = get_double(s, sp, "t_end", aiss.t_end);
    aiss.h = get_double(s, sp, "h", aiss.h);
    aiss.seed = get_seed(s, sp, "seed", aiss.seed);
    aiss.tail_fraction = get_double(s, sp, "tail_fraction", aiss.tail_fraction);
    aiss.blowup_threshold = get_double(s, sp, "blowup_threshold", aiss.blowup_threshold);
    aiss.radius_cap = get_double(s, sp, "radius_cap", aiss.radius_cap);
    cfg.sim.aiss_pass_fraction = get_double(s, sp, "pass_fraction", cfg.sim.aiss_pass_fraction);

    Theorem1Params& t1 = cfg.sim.theorem1;
    t1.u_levels = aiss.u_levels;
    t1.u_kind = aiss.u_kind;
    t1.sin_frequency = aiss.sin_frequency;
    t1.pcr_dwell = aiss.pcr_dwell;
    t1.t_end = aiss.t_end;
    t1.h = aiss.h;
    t1.seed = aiss.seed;
    t1.tail_fraction = aiss.tail_fraction;
    t1.blowup_threshold = aiss.blowup_threshold;
    t1.ic_box = aiss.ic_box;
    t1.radius_cap = aiss.radius_cap;
    t1.composition = cfg.verify.a_k_inner_composition;
    const json* t1j = member_opt(s, sp, "theorem1");
    const json& t = t1j ? *t1j : alg_empty;
    const std::string tp = sp + ".theorem1";
    t1.n_samples = get_count(t, tp, "n_samples", t1.n_samples);
    t1.bounding_cap = get_double(t, tp, "bounding_cap", t1.bounding_cap);
    t1.input_delta_max = get_double(t, tp, "input_delta_max", t1.input_delta_max);
    t1.dist_resolution = get_double(t, tp, "dist_resolution", t1.dist_resolution);
    t1.tail_snapshots = get_count(t, tp, "tail_snapshots", t1.tail_snapshots);
    t1.rejection_budget = get_count(t, tp, "rejection_budget", t1.rejection_budget);
    cfg.sim.theorem1_pass_fraction =
        get_double(t, tp, "pass_fraction", cfg.sim.theorem1_pass_fraction);
    if (const json* ks = member_opt(t, tp, "k")) {
        if (ks->is_string()) {
            if (as_string(*ks, tp + ".k") != "all") {
                throw SchemaError(tp + ".k", "expected \"all\" or an index array");
            }
        } else if (ks->is_array()) {
            for (std::size_t i = 0; i < ks->size(); ++i) {
                cfg.sim.theorem1_ks.push_back(
                    as_count((*ks)[i], tp + ".k[" + std::to_string(i) + "]"));
            }
        } else {
            throw SchemaError(tp + ".k", "expected \"all\" or an index array");
        }
    }

    // Output knobs.
    const json* outj = member_opt(root, "$", "output");
    const json& o = outj ? *outj : alg_empty;
    if (const json* dir = member_opt(o, "$.output", "directory")) {
        cfg.output.directory = as_string(*dir, "$.output.directory");
    }
    if (const json* formats = member_opt(o, "$.output", "formats")) {
        if (!formats->is_array()) throw SchemaError("$.output.formats", "expected an array");
        cfg.output.json = false;
        cfg.output.csv = false;
        for (std::size_t i = 0; i < formats->size(); ++i) {
            const std::string f =
                as_string((*formats)[i], "$.output.formats[" + std::to_string(i) + "]");
            if (f == "json") {
                cfg.output.json = true;
            } else if (f == "csv") {
                cfg.output.csv = true;
            } else {
                throw SchemaError("$.output.formats", "expected json|csv entries");
            }
        }
    }

    cfg.canonical = root.dump();
    cfg.hash = fnv1a(cfg.canonical);
    return cfg;
}

}  // namespace smallgain
