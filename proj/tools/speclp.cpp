// speclp <scenario> --config <file> [--seed N] [--out DIR] [--workers K]
// speclp reproduce --out DIR

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "speclp/acceptance.hpp"
#include "speclp/parallel.hpp"
#include "speclp/scenario.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitError = 3;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral Littlewood-Paley / g-function scenario runner"};
    std::string scenario_name;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    unsigned workers = 0;
    app.add_option("scenario", scenario_name,
                   "AUDIT_SYMBOL, KERNEL_DECAY, HORMANDER, DYADIC_ENVELOPE, GFUN_RATIO, LP_DECOMP, FRACLAP_XCHECK "
                   "or REPRODUCE (case-insensitive)")
        ->required();
    app.add_option("--config,-c", config_path, "flat key = value configuration file");
    app.add_option("--seed", seed, "corpus seed (overrides the config)");
    app.add_option("--out,-o", out_dir, "output directory (overrides the config)");
    app.add_option("--workers,-w", workers, "worker threads (0 = hardware concurrency)");
    CLI11_PARSE(app, argc, argv);

    try {
        speclp::set_worker_count(workers);
        const auto scenario = speclp::scenario_from_string(scenario_name);
        if (scenario == speclp::Scenario::Reproduce) {
            std::string dir = out_dir.value_or("reproduce");
            if (!config_path.empty()) dir = out_dir.value_or(speclp::load_config(config_path).output_dir);
            const auto results = speclp::run_acceptance(std::cout, std::filesystem::path(dir));
            const bool ok = speclp::all_passed(results);
            std::cout << (ok ? "all criteria passed" : "some criteria failed") << '\n';
            return ok ? 0 : kExitFail;
        }
        if (config_path.empty()) throw speclp::ConfigError("--config is required for scenario " + scenario_name);
        auto config = speclp::load_config(config_path);
        config.scenario = scenario;
        if (seed) config.seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        const auto result = speclp::run_scenario(config, config.output_dir);
        for (const auto& c : result.summary["checks"])
            std::cout << (c["pass"].get<bool>() ? "PASS  " : "FAIL  ") << c["name"].get<std::string>() << '\n';
        std::cout << "summary written to " << (std::filesystem::path(config.output_dir) / "summary.json").string()
                  << '\n';
        return result.pass ? 0 : kExitFail;
    } catch (const speclp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
}
