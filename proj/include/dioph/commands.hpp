#pragma once

// Command registry behind the CLI: each command maps a config to module
// operations, writes CSV/JSON outputs atomically, and returns an exit code
// (0 = checks pass, 2 = some bound or criterion violated).

#include "dioph/config.hpp"
#include "dioph/counting.hpp"
#include "dioph/kaufman.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dioph::cli {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::filesystem::path cache_dir;  // defaults to out_dir / "cache"
    unsigned threads = 1;
    bool quiet = false;
};

// Dispatches on config's top-level `command`; throws on operational errors.
int run(const Config& cfg, const RunOptions& opts);

std::vector<std::string> command_names();

// config helpers shared with tests
counting::LacunarySequence sequence_from_config(const Config& cfg, const std::string& section);
counting::ApproxFunction approx_from_config(const Config& cfg, const std::string& section);
kaufman::CantorScheme scheme_from_config(const Config& cfg, const RunOptions& opts,
                                         bool* cache_hit = nullptr);

// canonical default configs for the desk-scale experiments
Config default_config(const std::string& command);

}  // namespace dioph::cli
