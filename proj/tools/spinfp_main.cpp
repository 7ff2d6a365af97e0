// spinfp: pulsed-CPT spectrum simulator and analysis front end.
//
// Subcommands:
//   spectrum --config cfg [--out file.csv] [--threads n]
//   analyze  [file.csv] [--config cfg] --mode fwhm|fit|peaks|field
//   sweep    --config cfg [--out file.csv] [--threads n]
//
// analyze reads the given CSV, or with --config the output path of that
// configuration (so `spectrum --config x` then `analyze --config x` chain).
//
// Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O error.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <system_error>

#include "spinfp/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pulsed-CPT / temporal Fabry-Perot spectrum toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, csv_path, mode = "fwhm";
    int threads = 1;

    CLI::App* spectrum = app.add_subcommand("spectrum", "compute a spectrum CSV");
    spectrum->add_option("--config", config_path, "run configuration file")->required();
    spectrum->add_option("--out", out_path, "output CSV path (overrides config)");
    spectrum->add_option("--threads", threads, "worker threads, 0 = auto");

    CLI::App* analyze = app.add_subcommand("analyze", "analyze a spectrum CSV");
    analyze->add_option("csv", csv_path, "spectrum CSV to analyze");
    analyze->add_option("--config", config_path,
                        "analyze the output CSV of this configuration");
    analyze->add_option("--mode", mode, "fwhm | fit | peaks | field");

    CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter, measuring FWHM");
    sweep->add_option("--config", config_path, "run configuration file")->required();
    sweep->add_option("--out", out_path, "output CSV path (overrides config)");
    sweep->add_option("--threads", threads, "worker threads, 0 = auto");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (spectrum->parsed()) {
            spinfp::cmd_spectrum(spinfp::load_config(config_path), out_path, threads,
                                 std::cout);
        } else if (analyze->parsed()) {
            std::string path = csv_path;
            if (path.empty() && !config_path.empty())
                path = spinfp::load_config(config_path).out_path;
            if (path.empty())
                throw spinfp::ConfigError(
                    "analyze needs a CSV path or --config with an output path");
            spinfp::cmd_analyze(path, mode, std::cout);
        } else {
            spinfp::cmd_sweep(spinfp::load_config(config_path), out_path, threads,
                              std::cout);
        }
    } catch (const spinfp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const spinfp::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::system_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
