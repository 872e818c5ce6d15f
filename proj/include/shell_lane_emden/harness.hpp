#pragma once

// Experiment orchestration: JSON configuration, dispatch to the solvers,
// result records, and the results.json / summary.csv writers.
//
// Needs the vendored nlohmann json.hpp and OpenSSL (SHA-256 config digests).

#include "geometry.hpp"
#include "gk_sector.hpp"
#include "grid.hpp"
#include "nodal.hpp"
#include "pohozaev.hpp"
#include "radial_oracle.hpp"
#include "solver.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sle {

using json = nlohmann::json;

/// Invalid configuration; `path` points at the offending field ("/shell/p").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string p, const std::string& msg) : std::runtime_error(p + ": " + msg), path(std::move(p)) {}
    std::string path;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { solve, sweep, refine, pohozaev, oracle, gk };

inline const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::sweep: return "sweep";
    case Experiment::refine: return "refine";
    case Experiment::pohozaev: return "pohozaev";
    case Experiment::oracle: return "oracle";
    case Experiment::gk: return "gk";
    }
    return "unknown";
}

inline std::optional<Experiment> parse_experiment(const std::string& s) {
    for (Experiment e : {Experiment::solve, Experiment::sweep, Experiment::refine, Experiment::pohozaev,
                         Experiment::oracle, Experiment::gk})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

struct GridParams {
    int n_r = 32;
    int n_s = 128;
    double Z = 4.0;
    int n_theta = 32;
};

struct ExperimentConfig {
    int N = 4;
    int m = 1;
    double a = 1.0;
    double b = 2.0;
    double p = 3.0;
    GridParams grid;
    SolverConfig solver;
    Experiment experiment = Experiment::solve;
    std::vector<double> sweep_p;
    int refine_levels = 3;
    int gk_k = 3;
    bool force_supercritical = false;
    double oracle_tol = 1e-12;
    int oracle_steps = 100000;
    bool export_field = true;
    std::string out_dir = ".";

    ShellConfig shell() const { return {N, m, a, b, p}; }
};

// ---------------------------------------------------------------- parsing

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(path + "/" + key, "unknown field");
    }
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string where = path + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
    } else {
        if (!v.is_string()) throw ConfigError(where, "expected a string");
    }
    out = v.get<T>();
}

inline const json& object_at(const json& obj, const std::string& path, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_object()) throw ConfigError(path + "/" + key, "expected an object");
    return v;
}

} // namespace detail

/// Parses and validates a configuration document. `experiment` (from the
/// command line) wins over the document's own "experiment" field only when
/// the document has none; a disagreement is an error.
inline ExperimentConfig parse_config(const json& doc, std::optional<Experiment> experiment = std::nullopt) {
    using detail::read;
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    detail::reject_unknown(doc, "", {"shell", "grid", "solver", "experiment", "sweep_p", "refine_levels", "gk_k",
                                     "force_supercritical", "out_dir", "oracle", "export_field"});
    ExperimentConfig c;

    if (doc.contains("experiment")) {
        std::string name;
        read(doc, "", "experiment", name);
        const auto e = parse_experiment(name);
        if (!e) throw ConfigError("/experiment", "unknown experiment '" + name + "'");
        if (experiment && *experiment != *e)
            throw ConfigError("/experiment", "config says '" + name + "' but '" + to_string(*experiment) +
                                                 "' was requested");
        c.experiment = *e;
    } else if (experiment) {
        c.experiment = *experiment;
    } else {
        throw ConfigError("/experiment", "no experiment given");
    }

    if (!doc.contains("shell")) throw ConfigError("/shell", "missing");
    const json& shell = detail::object_at(doc, "", "shell");
    detail::reject_unknown(shell, "/shell", {"N", "m", "a", "b", "p"});
    for (const char* k : {"N", "m", "a", "b"})
        if (!shell.contains(k)) throw ConfigError(std::string("/shell/") + k, "missing");
    read(shell, "/shell", "N", c.N);
    read(shell, "/shell", "m", c.m);
    read(shell, "/shell", "a", c.a);
    read(shell, "/shell", "b", c.b);

    if (doc.contains("sweep_p")) {
        const json& sp = doc.at("sweep_p");
        if (!sp.is_array()) throw ConfigError("/sweep_p", "expected an array of numbers");
        for (std::size_t i = 0; i < sp.size(); ++i) {
            if (!sp[i].is_number()) throw ConfigError("/sweep_p/" + std::to_string(i), "expected a number");
            const double p = sp[i].get<double>();
            if (!(p > 2.0) || !std::isfinite(p)) throw ConfigError("/sweep_p/" + std::to_string(i), "p must be > 2");
            c.sweep_p.push_back(p);
        }
    }
    if (c.experiment == Experiment::sweep) {
        if (c.sweep_p.empty()) throw ConfigError("/sweep_p", "sweep needs a nonempty list of p values");
        std::sort(c.sweep_p.begin(), c.sweep_p.end());
        c.p = c.sweep_p.front();
        read(shell, "/shell", "p", c.p);
    } else {
        if (!shell.contains("p")) throw ConfigError("/shell/p", "missing");
        read(shell, "/shell", "p", c.p);
    }
    try {
        (void)c.shell();
    } catch (const DomainError& e) {
        throw ConfigError("/shell", e.what());
    }

    if (doc.contains("grid")) {
        const json& g = detail::object_at(doc, "", "grid");
        detail::reject_unknown(g, "/grid", {"n_r", "n_s", "Z", "n_theta"});
        read(g, "/grid", "n_r", c.grid.n_r);
        read(g, "/grid", "n_s", c.grid.n_s);
        read(g, "/grid", "Z", c.grid.Z);
        read(g, "/grid", "n_theta", c.grid.n_theta);
    }
    if (c.grid.n_r < 4) throw ConfigError("/grid/n_r", "must be >= 4");
    if (c.grid.n_s < 4) throw ConfigError("/grid/n_s", "must be >= 4");
    if (c.grid.n_theta < 4) throw ConfigError("/grid/n_theta", "must be >= 4");
    if (!(c.grid.Z > 0.0)) throw ConfigError("/grid/Z", "must be > 0");

    if (doc.contains("solver")) {
        const json& s = detail::object_at(doc, "", "solver");
        detail::reject_unknown(s, "/solver", {"energy_tol", "residual_tol", "max_outer", "linear_tol", "init"});
        read(s, "/solver", "energy_tol", c.solver.energy_tol);
        read(s, "/solver", "residual_tol", c.solver.residual_tol);
        read(s, "/solver", "max_outer", c.solver.max_outer);
        read(s, "/solver", "linear_tol", c.solver.linear_tol);
        if (s.contains("init")) {
            std::string init;
            read(s, "/solver", "init", init);
            if (init != "positive_bump")
                throw ConfigError("/solver/init", "only 'positive_bump' can be selected from a config file");
        }
    }
    try {
        c.solver.validate();
    } catch (const DomainError& e) {
        throw ConfigError("/solver", e.what());
    }

    read(doc, "", "refine_levels", c.refine_levels);
    read(doc, "", "gk_k", c.gk_k);
    read(doc, "", "force_supercritical", c.force_supercritical);
    read(doc, "", "out_dir", c.out_dir);
    read(doc, "", "export_field", c.export_field);
    if (doc.contains("oracle")) {
        const json& o = detail::object_at(doc, "", "oracle");
        detail::reject_unknown(o, "/oracle", {"tol", "n_steps"});
        read(o, "/oracle", "tol", c.oracle_tol);
        read(o, "/oracle", "n_steps", c.oracle_steps);
    }

    if ((c.experiment == Experiment::refine || c.experiment == Experiment::pohozaev) && c.refine_levels < 1)
        throw ConfigError("/refine_levels", "must be >= 1");
    if (c.experiment == Experiment::refine && c.refine_levels < 2)
        throw ConfigError("/refine_levels", "refine needs at least 2 levels");
    if (c.experiment == Experiment::oracle && reduced_dimension(c.N, c.m) != 0)
        throw ConfigError("/shell/m", "oracle needs a radial configuration (m = N - 1)");
    if (c.experiment == Experiment::oracle && (!(c.oracle_tol > 0.0) || c.oracle_steps < 100))
        throw ConfigError("/oracle", "need tol > 0 and n_steps >= 100");
    if (c.experiment == Experiment::gk) {
        if (c.N != 3 || c.m != 1) throw ConfigError("/shell", "gk is implemented for N = 3, m = 1 only");
        if (c.gk_k < 3) throw ConfigError("/gk_k", "must be >= 3");
        if (!(c.p < 6.0)) throw ConfigError("/shell/p", "gk needs 2 < p < 6");
    }
    return c;
}

/// The configuration fields that determine a result (no output location).
inline json canonical_config(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["shell"] = {{"N", c.N}, {"m", c.m}, {"a", c.a}, {"b", c.b}, {"p", c.p}};
    j["grid"] = {{"n_r", c.grid.n_r}, {"n_s", c.grid.n_s}, {"Z", c.grid.Z}, {"n_theta", c.grid.n_theta}};
    j["solver"] = {{"energy_tol", c.solver.energy_tol},
                   {"residual_tol", c.solver.residual_tol},
                   {"max_outer", c.solver.max_outer},
                   {"linear_tol", c.solver.linear_tol},
                   {"init", "positive_bump"}};
    j["force_supercritical"] = c.force_supercritical;
    switch (c.experiment) {
    case Experiment::sweep: j["sweep_p"] = c.sweep_p; break;
    case Experiment::refine:
    case Experiment::pohozaev: j["refine_levels"] = c.refine_levels; break;
    case Experiment::oracle: j["oracle"] = {{"tol", c.oracle_tol}, {"n_steps", c.oracle_steps}}; break;
    case Experiment::gk: j["gk_k"] = c.gk_k; break;
    case Experiment::solve: break;
    }
    return j;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

/// SHA-256 of the canonical serialization (sorted keys, shortest round-trip floats).
inline std::string config_digest(const json& canonical) { return sha256_hex(canonical.dump()); }

// ---------------------------------------------------------------- records

enum class RecordStatus { ok, refused, nonconverged };

inline const char* to_string(RecordStatus s) {
    switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::refused: return "refused";
    case RecordStatus::nonconverged: return "nonconverged";
    }
    return "unknown";
}

struct ResultRecord {
    Experiment experiment = Experiment::solve;
    RecordStatus status = RecordStatus::ok;
    std::string message;
    json config;
    std::string config_digest;
    int N = 0, m = 0;
    double a = 0, b = 0, p = 0;
    int n_r = 0, n_s = 0;
    double Z = 0;
    std::optional<int> n_theta;
    std::string regime;
    std::optional<double> critical_exponent;  ///< empty when infinite
    std::optional<double> c0;
    std::optional<double> pde_residual;
    std::optional<double> constraint_defect;
    std::optional<int> outer_iters;
    std::optional<PohozaevReport> pohozaev;
    std::optional<TailStats> tail;
    std::optional<NodalReport> nodal;
    json extra = json::object();
    double seconds = 0.0;
};

/// Output of a large-but-not-huge field: written alongside the reports.
struct FieldExport {
    std::string file_name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunOutcome {
    std::vector<ResultRecord> records;
    std::vector<FieldExport> exports;
};

inline json to_json(const PohozaevReport& r) {
    return {{"div_term", r.div_term},
            {"dchi_term", r.dchi_term},
            {"shell_flux", r.shell_flux},
            {"trunc_flux", r.trunc_flux},
            {"residual", r.residual},
            {"relative_residual", r.relative_residual()},
            {"kappa", r.kappa},
            {"dirichlet_energy", r.dirichlet_energy},
            {"potential_energy", r.potential_energy},
            {"angular_constant", r.angular_constant},
            {"truncation_present", r.truncation_present},
            {"degenerate", r.degenerate},
            {"chain_bound", r.chain_bound()},
            {"chain_holds", r.chain_holds},
            {"chain_slack", r.chain_slack}};
}

inline json to_json(const ResultRecord& r) {
    json j;
    j["experiment"] = to_string(r.experiment);
    j["status"] = to_string(r.status);
    j["message"] = r.message;
    j["config"] = r.config;
    j["config_digest"] = r.config_digest;
    j["shell"] = {{"N", r.N}, {"m", r.m}, {"a", r.a}, {"b", r.b}, {"p", r.p}};
    j["grid"] = {{"n_r", r.n_r}, {"n_s", r.n_s}, {"Z", r.Z}};
    if (r.n_theta) j["grid"]["n_theta"] = *r.n_theta;
    j["regime"] = r.regime;
    j["critical_exponent"] = r.critical_exponent ? json(*r.critical_exponent) : json("inf");
    const auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    j["c0"] = opt(r.c0);
    j["pde_residual"] = opt(r.pde_residual);
    j["constraint_defect"] = opt(r.constraint_defect);
    j["outer_iters"] = opt(r.outer_iters);
    j["pohozaev"] = r.pohozaev ? to_json(*r.pohozaev) : json(nullptr);
    j["tail"] = r.tail ? json{{"s", r.tail->s}, {"value", r.tail->value}} : json(nullptr);
    j["nodal"] = r.nodal ? json{{"count", r.nodal->count},
                                {"threshold", r.nodal->threshold},
                                {"component_sizes", r.nodal->component_sizes}}
                         : json(nullptr);
    j["extra"] = r.extra;
    j["timing"] = {{"seconds", r.seconds}};
    return j;
}

inline json results_document(const std::vector<ResultRecord>& records) {
    json doc;
    doc["records"] = json::array();
    for (const auto& r : records) doc["records"].push_back(to_json(r));
    return doc;
}

/// The results document with every timing field removed.
inline json payload_without_timing(json doc) {
    for (auto& r : doc["records"]) r.erase("timing");
    return doc;
}

// ---------------------------------------------------------------- running

namespace detail {

inline ResultRecord base_record(const ExperimentConfig& c) {
    ResultRecord r;
    r.experiment = c.experiment;
    r.config = canonical_config(c);
    r.config_digest = config_digest(r.config);
    r.N = c.N;
    r.m = c.m;
    r.a = c.a;
    r.b = c.b;
    r.p = c.p;
    r.n_r = c.grid.n_r;
    r.n_s = reduced_dimension(c.N, c.m) == 0 ? 0 : c.grid.n_s;
    r.Z = reduced_dimension(c.N, c.m) == 0 ? 0.0 : c.grid.Z;
    const ExponentRegime reg = classify_regime(c.N, c.m, c.p);
    r.regime = to_string(reg.regime);
    if (reg.critical_exponent.is_finite()) r.critical_exponent = reg.critical_exponent.value();
    return r;
}

inline SolverConfig solver_for(const ExperimentConfig& c) {
    SolverConfig s = c.solver;
    s.force = c.force_supercritical;
    s.fail_on_nonconvergence = false;
    return s;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// One ground-state solve with its Pohozaev report and tail statistics.
inline ResultRecord solve_record(const ExperimentConfig& c) {
    Stopwatch clock;
    ResultRecord rec = base_record(c);
    const ShellConfig cfg = c.shell();
    const StripGrid grid = build_grid(cfg, c.grid.n_r, c.grid.n_s, c.grid.Z);
    try {
        const MinimizerRecord mr = ground_state(grid, cfg, solver_for(c));
        rec.status = mr.converged ? RecordStatus::ok : RecordStatus::nonconverged;
        if (!mr.converged) rec.message = "no convergence after " + std::to_string(mr.outer_iters) + " outer iterations";
        rec.c0 = mr.c;
        rec.pde_residual = mr.pde_residual;
        rec.constraint_defect = mr.constraint_defect;
        rec.outer_iters = mr.outer_iters;
        rec.pohozaev = pohozaev_report(mr.u, cfg);
        if (grid.has_s_axis()) rec.tail = decay_profile(mr.v);
        double vmin = 0.0;
        for (double x : mr.v.values) vmin = std::min(vmin, x);
        rec.extra["min_v"] = vmin;
        rec.extra["z_evenness_defect"] = z_evenness_defect(mr.v);
        rec.extra["amplitude"] = mr.u.max_abs();
        rec.extra["safeguard_steps"] = mr.safeguard_steps;
        rec.extra["gauge_shifts"] = mr.gauge_shifts;
        if (c.force_supercritical && classify_regime(cfg).regime != Regime::subcritical)
            rec.message = "forced run in the nonexistence regime (diagnostic only)";
    } catch (const RegimeRefusal& e) {
        rec.status = RecordStatus::refused;
        rec.message = e.what();
    }
    rec.seconds = clock.seconds();
    return rec;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline double log2_ratio(double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0)) return NAN;
    return std::log2(coarse / fine);
}

inline RunOutcome run_sweep(const ExperimentConfig& c, int threads) {
    RunOutcome out;
    out.records.resize(c.sweep_p.size());
    parallel_for(c.sweep_p.size(), threads, [&](std::size_t i) {
        ExperimentConfig ci = c;
        ci.p = c.sweep_p[i];
        ci.experiment = Experiment::solve;
        ResultRecord r = solve_record(ci);
        r.experiment = Experiment::sweep;
        r.config["sweep_p"] = c.sweep_p;
        r.config["experiment"] = "sweep";
        r.config_digest = config_digest(r.config);
        out.records[i] = std::move(r);
    });
    return out;
}

inline RunOutcome run_refine(const ExperimentConfig& c, int threads) {
    RunOutcome out;
    const auto levels = static_cast<std::size_t>(c.refine_levels);
    out.records.resize(levels);
    parallel_for(levels, threads, [&](std::size_t l) {
        ExperimentConfig cl = c;
        cl.grid.n_r = c.grid.n_r << l;
        cl.grid.n_s = c.grid.n_s << l;
        ResultRecord r = solve_record(cl);
        r.extra["level"] = l;
        out.records[l] = std::move(r);
    });
    // Observed orders against the next coarser level.
    for (std::size_t l = 1; l < levels; ++l) {
        auto& fine = out.records[l];
        const auto& coarse = out.records[l - 1];
        if (fine.pohozaev && coarse.pohozaev)
            fine.extra["pohozaev_order"] =
                log2_ratio(coarse.pohozaev->relative_residual(), fine.pohozaev->relative_residual());
        if (l >= 2 && fine.c0 && coarse.c0 && out.records[l - 2].c0) {
            const double d1 = std::abs(*coarse.c0 - *out.records[l - 2].c0);
            const double d2 = std::abs(*fine.c0 - *coarse.c0);
            fine.extra["c0_order"] = log2_ratio(d1, d2);
        }
    }
    return out;
}

/// Truncation probe: Z doubles per level at fixed spacing; each record
/// carries the truncation share trunc_flux / dirichlet_energy and its decay
/// factor against the previous level.
inline RunOutcome run_pohozaev(const ExperimentConfig& c, int threads) {
    RunOutcome out;
    const bool has_z = reduced_dimension(c.N, c.m) > 0;
    const std::size_t levels = has_z ? static_cast<std::size_t>(std::max(c.refine_levels, 2)) : 1;
    out.records.resize(levels);
    parallel_for(levels, threads, [&](std::size_t l) {
        ExperimentConfig cl = c;
        cl.grid.Z = c.grid.Z * static_cast<double>(1u << l);
        cl.grid.n_s = c.grid.n_s << l;
        ResultRecord r = solve_record(cl);
        r.extra["level"] = l;
        if (r.pohozaev && r.pohozaev->dirichlet_energy > 0.0)
            r.extra["trunc_share"] = r.pohozaev->trunc_flux / r.pohozaev->dirichlet_energy;
        out.records[l] = std::move(r);
    });
    for (std::size_t l = 1; l < levels; ++l) {
        const auto& prev = out.records[l - 1].extra;
        auto& cur = out.records[l].extra;
        if (prev.contains("trunc_share") && cur.contains("trunc_share")) {
            const double a = prev["trunc_share"].get<double>(), b = cur["trunc_share"].get<double>();
            const double factor = b > 0.0 ? a / b : HUGE_VAL;
            cur["trunc_decay_factor"] = std::isfinite(factor) ? json(factor) : json("inf");
            cur["trunc_decays_2x"] = factor >= 2.0;
        }
    }
    return out;
}

inline RunOutcome run_oracle(const ExperimentConfig& c) {
    Stopwatch clock;
    RunOutcome out;
    ResultRecord r = base_record(c);
    const ShellConfig cfg = c.shell();
    const RadialSolution sol = radial_ground_state(cfg, c.oracle_tol, c.oracle_steps);
    r.extra["sigma_star"] = sol.sigma_star;
    r.extra["amplitude"] = sol.amplitude;
    r.extra["energy"] = sol.energy;
    r.extra["end_value"] = sol.end_value;
    r.extra["n_steps"] = c.oracle_steps;
    const StripGrid grid = build_grid(cfg, c.grid.n_r, 0, 0.0);
    const Field sampled = sample_field(grid, [&](double rr, double) { return sol.sample(rr); });
    r.pohozaev = pohozaev_report(sampled, cfg);
    r.pde_residual = pde_residual(sampled, cfg.p());
    r.seconds = clock.seconds();
    out.records.push_back(std::move(r));

    if (c.export_field) {
        FieldExport fe{"oracle_profile.csv", {"r", "u"}, {}};
        for (std::size_t i = 0; i < sol.r.size(); ++i) fe.rows.push_back({sol.r[i], sol.u[i]});
        out.exports.push_back(std::move(fe));
    }
    return out;
}

inline RunOutcome run_gk(const ExperimentConfig& c) {
    Stopwatch clock;
    RunOutcome out;
    ResultRecord r = base_record(c);
    r.n_s = c.grid.n_s;
    r.Z = c.grid.Z;
    r.n_theta = c.grid.n_theta;
    const int k = c.gk_k;
    const CylinderGrid sector = build_sector_grid(k, c.a, c.b, c.grid.n_r, c.grid.n_theta, c.grid.n_s, c.grid.Z);
    const SectorRecord sr = sector_ground_state(sector, c.p, solver_for(c));
    r.status = sr.converged ? RecordStatus::ok : RecordStatus::nonconverged;
    if (!sr.converged) r.message = "no convergence after " + std::to_string(sr.outer_iters) + " outer iterations";
    r.c0 = sr.c;
    r.pde_residual = sr.pde_residual;
    r.constraint_defect = sr.constraint_defect;
    r.outer_iters = sr.outer_iters;
    const SectorField full = extend_by_reflection(sr.u, k);
    r.nodal = count_nodal_domains(full, 0.01);
    r.extra["k"] = k;
    r.extra["equivariance_defect"] = equivariance_defect(full, k);
    r.extra["residual_away_from_seams"] = residual_away_from_seams(full, k, c.p);
    r.extra["z_evenness_defect"] = z_evenness_defect(sr.v);
    r.extra["amplitude"] = sr.u.max_abs();
    r.seconds = clock.seconds();
    out.records.push_back(std::move(r));

    if (c.export_field) {
        FieldExport fe{"gk_field_k" + std::to_string(k) + ".csv", {"rho", "theta", "z", "value"}, {}};
        const CylinderGrid& g = full.grid;
        fe.rows.reserve(g.size());
        for (int l = 0; l < g.n_z(); ++l)
            for (int j = 0; j < g.n_theta(); ++j)
                for (int i = 0; i < g.n_rho(); ++i)
                    fe.rows.push_back({g.rho_nodes[static_cast<std::size_t>(i)],
                                       g.theta_nodes[static_cast<std::size_t>(j)],
                                       g.z_nodes[static_cast<std::size_t>(l)], full.values[g.index(i, j, l)]});
        out.exports.push_back(std::move(fe));
    }
    return out;
}

} // namespace detail

/// Runs the configured experiment. Independent solves (sweep points,
/// refinement levels, truncation levels) use up to `threads` workers;
/// records come back in a fixed order regardless.
inline RunOutcome run(const ExperimentConfig& c, int threads = 1) {
    switch (c.experiment) {
    case Experiment::solve: return RunOutcome{{detail::solve_record(c)}, {}};
    case Experiment::sweep: return detail::run_sweep(c, threads);
    case Experiment::refine: return detail::run_refine(c, threads);
    case Experiment::pohozaev: return detail::run_pohozaev(c, threads);
    case Experiment::oracle: return detail::run_oracle(c);
    case Experiment::gk: return detail::run_gk(c);
    }
    throw ConfigError("/experiment", "unhandled experiment");
}

namespace exit_codes {
constexpr int success = 0;
constexpr int crash = 1;
constexpr int config_error = 2;
constexpr int nonconvergence = 3;
constexpr int refusal = 4;
} // namespace exit_codes

/// 4 if any record was refused, else 3 if any failed to converge, else 0.
inline int exit_code(const RunOutcome& out) {
    bool refused = false, nonconverged = false;
    for (const auto& r : out.records) {
        refused = refused || r.status == RecordStatus::refused;
        nonconverged = nonconverged || r.status == RecordStatus::nonconverged;
    }
    if (refused) return exit_codes::refusal;
    if (nonconverged) return exit_codes::nonconvergence;
    return exit_codes::success;
}

// ---------------------------------------------------------------- output

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols{"N",  "m",  "a",  "b",  "p",  "n_r", "n_s", "Z",
                                               "c0", "pde_residual", "pohozaev_residual", "kappa",
                                               "shell_flux", "trunc_flux", "nodal_count", "seconds"};
    return cols;
}

inline std::string summary_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream os;
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : records) {
        const auto pz = [&](auto member) {
            return r.pohozaev ? format_double(member(*r.pohozaev)) : std::string();
        };
        os << r.N << ',' << r.m << ',' << format_double(r.a) << ',' << format_double(r.b) << ','
           << format_double(r.p) << ',' << r.n_r << ',' << r.n_s << ',' << format_double(r.Z) << ',' << opt(r.c0)
           << ',' << opt(r.pde_residual) << ',' << pz([](const PohozaevReport& p) { return p.residual; }) << ','
           << pz([](const PohozaevReport& p) { return p.kappa; }) << ','
           << pz([](const PohozaevReport& p) { return p.shell_flux; }) << ','
           << pz([](const PohozaevReport& p) { return p.trunc_flux; }) << ','
           << (r.nodal ? std::to_string(r.nodal->count) : std::string()) << ',' << format_double(r.seconds) << '\n';
    }
    return os.str();
}

/// Writes results.json, summary.csv and any field exports into out_dir.
inline void emit_report(const RunOutcome& out, const std::filesystem::path& out_dir) {
    if (out.records.empty()) throw ConfigError("", "no records to write");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw IoError("cannot write " + (out_dir / name).string());
        f << text;
        if (!f) throw IoError("write failed for " + (out_dir / name).string());
    };
    write("results.json", results_document(out.records).dump(2) + "\n");
    write("summary.csv", summary_csv(out.records));
    for (const auto& fe : out.exports) {
        std::string text;
        for (std::size_t i = 0; i < fe.columns.size(); ++i) text += (i ? "," : "") + fe.columns[i];
        text += '\n';
        for (const auto& row : fe.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + format_double(row[i]);
            text += '\n';
        }
        write(fe.file_name, text);
    }
}

} // namespace sle
