#include <CLI11.hpp>
#include <iostream>

#include "qes/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quasi-exact spectra of the 2+1D generalized Dirac oscillator "
                 "with inverse-power couplings"};
    app.require_subcommand(1);

    std::string config;
    qes::cli::CliOptions opts;
    std::string grid_spec;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "job configuration file")->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--jobs", opts.jobs, "concurrent workers for sweeps")->default_val(1);
        sub->add_option("--grid", grid_spec, "rmin,rmax,count override");
        sub->add_flag("--plot-data", opts.plot_data, "emit long-format tables for plotting");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve/calibrate levels, write spectrum tables");
    CLI::App* verify = app.add_subcommand("verify", "run the independent oracle suite");
    CLI::App* sweep = app.add_subcommand("sweep", "scan a free coefficient, write calibration.csv");
    add_common(solve);
    add_common(verify);
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    if (!grid_spec.empty()) {
        qes::numeric::RadialGrid g;
        if (std::sscanf(grid_spec.c_str(), "%lf,%lf,%d", &g.r_min, &g.r_max, &g.count) != 3) {
            std::cerr << "config error: --grid expects rmin,rmax,count\n";
            return 2;
        }
        opts.grid = g;
    }

    try {
        if (solve->parsed()) return qes::cli::cmd_solve(config, opts);
        if (verify->parsed()) return qes::cli::cmd_verify(config, opts);
        if (sweep->parsed()) return qes::cli::cmd_sweep(config, opts);
    } catch (const qes::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
