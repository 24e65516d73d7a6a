#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freeway/cli.hpp"

namespace fs = std::filesystem;
using freeway::cli::Command;

int main(int argc, char** argv) {
    CLI::App app{"Freeway ramp-metering simulator and analyzer"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out_dir;
    bool batch = false;
    std::int64_t seed = -1;

    for (const char* name : {"simulate", "metrics", "pwa", "reach", "feasibility"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", configs, "Scenario config (JSON); several with --batch")->required();
        sub->add_option("--out", out_dir, "Output directory (default: $FREEWAY_OUT_DIR or .)");
        sub->add_flag("--batch", batch, "Run several configs concurrently, prefixing outputs with the config name");
        sub->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : freeway::cli::config_error;
    }

    const Command cmd = *freeway::cli::parse_command(app.get_subcommands().front()->get_name());
    if (configs.size() > 1 && !batch) {
        std::cerr << "config error: several configs given; pass --batch to run them together\n";
        return freeway::cli::config_error;
    }

    freeway::cli::RunOptions opt;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);

    if (!batch) return freeway::cli::run(cmd, configs.front(), opt, std::cerr);

    // One independent task per scenario; messages are buffered per task so
    // output stays readable.
    std::vector<std::future<std::pair<int, std::string>>> tasks;
    for (const auto& path : configs) {
        tasks.push_back(std::async(std::launch::async, [cmd, path, opt]() mutable {
            opt.prefix = fs::path(path).stem().string() + "_";
            std::ostringstream err;
            const int rc = freeway::cli::run(cmd, path, opt, err);
            return std::pair{rc, err.str()};
        }));
    }
    int worst = 0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        auto [rc, msg] = tasks[k].get();
        if (!msg.empty()) std::cerr << configs[k] << ": " << msg;
        worst = std::max(worst, rc);
    }
    return worst;
}
