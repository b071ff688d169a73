#include "sdwave/config.hpp"
#include "sdwave/error.hpp"
#include "sdwave/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Finite-element / implicit-Euler simulation of the stochastic strongly damped wave equation"};
    app.set_version_flag("--version", std::string("sdwave ") + sdwave::kVersion);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
    std::optional<std::string> out_dir;
    int threads = 0;
    app.add_option("config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override the configured master seed");
    app.add_option("--samples", samples, "override mc_samples")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "output directory (default: output_path from the config)");
    app.add_option("--threads", threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);

    sdwave::RunConfig cfg;
    try {
        std::ifstream in(config_path);
        std::stringstream text;
        text << in.rdbuf();
        cfg = sdwave::parse_config(text.str());
        if (seed) cfg.seed = *seed;
        if (samples) cfg.mc_samples = *samples;
    } catch (const sdwave::Error& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return 2;
    }
    sdwave::RunOptions opts;
    opts.out_dir = out_dir ? *out_dir : cfg.output_path;
    opts.threads = threads;
    return sdwave::run_command(cfg, opts, std::cout);
}
