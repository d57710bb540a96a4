#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "commands.hpp"

using namespace dbem;
using namespace dbem::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Boundary integral spectral solver for Dirac operators with boundary conditions and shell interactions"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    int level = -1, grid = -1, threads = -1;
    long long seed = -1;
    std::vector<double> window;
    std::string out;
    bool compare = false;
    app.add_option("--config", config_path, "TOML run configuration")->check(CLI::ExistingFile);
    app.add_option("--mesh-level", level, "subdivision level (overrides geometry.level and identities.levels)");
    app.add_option("--window", window, "scan window a b inside (-m, m)")->expected(2);
    app.add_option("--grid", grid, "scan samples across the window");
    app.add_flag("--compare-oracle", compare, "compare scan roots with the ball oracle");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
    app.add_option("--seed", seed, "seed for probe and target placement");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Sub subs[] = {{"mesh", "generate geometry, write OFF and mesh statistics", cmd_mesh},
                        {"identities", "operator identity residual table across refinement levels", cmd_identities},
                        {"scan", "Birman-Schwinger eigenvalue scan in the gap", cmd_scan},
                        {"oracle", "partial-wave eigenvalues on the ball", cmd_oracle},
                        {"resolvent", "resolvent residual report at interior targets", cmd_resolvent}};
    std::vector<std::pair<CLI::App*, const Sub*>> apps;
    for (const auto& s : subs) apps.emplace_back(app.add_subcommand(s.name, s.help), &s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::usage;
    }

    try {
        RunConfig c = config_path.empty() ? parse_config_text("", "<defaults>") : load_config(config_path);
        if (level >= 0) {
            c.geometry.level = level;
            c.identities.levels = {level};
        }
        if (!window.empty()) {
            c.scan.lo = window[0];
            c.scan.hi = window[1];
        }
        if (grid >= 0) c.scan.grid = grid;
        if (compare) c.scan.compare_oracle = true;
        if (!out.empty()) c.out = out;
        if (threads >= 0) c.threads = threads;
        if (seed >= 0) c.seed = static_cast<unsigned>(seed);
        validate(c);
        if (c.threads > 0) omp_set_num_threads(c.threads);
        for (const auto& [sub, s] : apps)
            if (sub->parsed()) return s->run(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::usage ? Exit::usage : Exit::numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::numerical;
    }
    return Exit::usage;
}
