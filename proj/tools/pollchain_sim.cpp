#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pollchain/netsim/simulator.hpp"

// Exit codes: 0 clean run, 1 safety violation or no convergence, 2 bad input.
int main(int argc, char** argv) {
    CLI::App app{"Deterministic multi-node simulator", "pollchain-sim"};
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool compact = false;
    app.add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    app.add_option("-o,--out", out, "Write the report here instead of stdout");
    app.add_option("--seed", seed, "Override the scenario seed");
    app.add_flag("--compact", compact, "Single-line JSON");
    CLI11_PARSE(app, argc, argv);

    nlohmann::json j;
    try {
        std::ifstream in(scenario);
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << scenario << ": " << e.what() << "\n";
        return 2;
    }
    auto cfg = pollchain::netsim::config_from_json(j);
    if (!cfg) {
        std::cerr << "error: " << cfg.error() << "\n";
        return 2;
    }
    if (seed) cfg->seed = *seed;
    auto report = pollchain::netsim::run_scenario(cfg.value());
    if (!report) {
        std::cerr << "error: " << report.error() << "\n";
        return 2;
    }
    auto text = report->to_json().dump(compact ? -1 : 2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out);
        f << text;
        if (!f) {
            std::cerr << "error: cannot write " << out << "\n";
            return 2;
        }
    }
    return report->safety_violations.empty() && report->converged ? 0 : 1;
}
