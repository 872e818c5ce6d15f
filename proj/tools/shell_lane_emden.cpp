// shell-lane-emden <experiment> --config cfg.json [--out-dir DIR] [--threads N] [--force]
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 nonconvergence, 4 refusal in the nonexistence regime.

#include <shell_lane_emden/harness.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Lane-Emden ground states on cylindrical shells"};
    app.set_version_flag("--version", "0.1.0");
    std::string experiment, config_path, out_dir;
    int threads = 1;
    bool force = false;
    app.add_option("experiment", experiment, "solve | sweep | refine | pohozaev | oracle | gk")->required();
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out-dir", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads for independent solves")->check(CLI::PositiveNumber);
    app.add_flag("--force", force, "probe p >= critical exponent instead of refusing");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sle::exit_codes::config_error;
    }

    try {
        const auto which = sle::parse_experiment(experiment);
        if (!which) throw sle::ConfigError("/experiment", "unknown experiment '" + experiment + "'");
        std::ifstream in(config_path);
        if (!in) throw sle::ConfigError("", "cannot open " + config_path);
        sle::json doc;
        try {
            doc = sle::json::parse(in);
        } catch (const sle::json::parse_error& e) {
            throw sle::ConfigError("", std::string("invalid JSON: ") + e.what());
        }
        sle::ExperimentConfig cfg = sle::parse_config(doc, which);
        if (force) cfg.force_supercritical = true;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        const sle::RunOutcome out = sle::run(cfg, threads);
        sle::emit_report(out, cfg.out_dir);
        for (const auto& r : out.records) {
            std::cout << to_string(r.status) << "  p=" << sle::format_double(r.p) << "  n_r=" << r.n_r
                      << "  n_s=" << r.n_s << "  Z=" << sle::format_double(r.Z);
            if (r.c0) std::cout << "  c0=" << sle::format_double(*r.c0);
            if (r.pohozaev) std::cout << "  pohozaev_rel=" << sle::format_double(r.pohozaev->relative_residual());
            if (r.nodal) std::cout << "  nodal=" << r.nodal->count;
            std::cout << '\n';
            if (!r.message.empty()) std::cerr << r.message << '\n';
        }
        return sle::exit_code(out);
    } catch (const sle::ConfigError& e) {
        std::cerr << "config error at " << (e.path.empty() ? "/" : e.path) << ": " << e.what() << '\n';
        return sle::exit_codes::config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sle::exit_codes::crash;
    }
}
