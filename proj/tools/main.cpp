#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "gfatom/commands.hpp"
#include "gfatom/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Photon-counting statistics of a driven four-level atom"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")
            ->required();
        sub->add_option("--out", out_dir, "output directory")
            ->capture_default_str();
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")
            ->capture_default_str();
    };
    CLI::App* spectrum =
        app.add_subcommand("spectrum", "emission line shape over one axis");
    CLI::App* map2d =
        app.add_subcommand("map2d", "intensity/Q map over two axes");
    CLI::App* pn =
        app.add_subcommand("pn", "photon-number distribution at fixed time");
    CLI::App* validate =
        app.add_subcommand("validate", "run the built-in cross-checks");
    for (CLI::App* s : {spectrum, map2d, pn, validate}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems exit 1, help exits 0
    }

    try {
        const gfatom::RunConfig rc = gfatom::load_run_config(config_path);
        gfatom::CommandOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        if (spectrum->parsed()) return gfatom::cmd_spectrum(rc, opts);
        if (map2d->parsed()) return gfatom::cmd_map2d(rc, opts);
        if (pn->parsed()) return gfatom::cmd_pn(rc, opts);
        return gfatom::cmd_validate(rc, opts);
    } catch (const gfatom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
}
