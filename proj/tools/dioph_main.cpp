#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "dioph/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dioph: quantitative metric Diophantine approximation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string cache_dir;
    unsigned threads = 1;
    long long seed_override = -1;

    for (const auto& name : dioph::cli::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment configuration file");
        sub->add_option("--seed", seed_override, "master seed override");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--cache", cache_dir, "cache directory (default <out>/cache)");
        sub->add_option("--threads", threads, "worker threads");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        std::string command = app.get_subcommands().front()->get_name();
        dioph::Config cfg = config_path.empty() ? dioph::cli::default_config(command)
                                                : dioph::Config::load_file(config_path);
        cfg.set("", "command", command);
        if (seed_override >= 0)
            cfg.set("", "seed", std::to_string(static_cast<std::uint64_t>(seed_override)));

        dioph::cli::RunOptions opts;
        opts.out_dir = out_dir;
        if (!cache_dir.empty()) opts.cache_dir = cache_dir;
        opts.threads = threads;
        return dioph::cli::run(cfg, opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
