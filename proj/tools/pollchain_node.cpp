#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "pollchain/chain/genesis.hpp"
#include "pollchain/node/http.hpp"
#include "pollchain/node/node.hpp"

// Exit codes: 0 clean shutdown, 2 bad configuration, 3 chain or storage
// failure at startup, 4 cannot listen.

namespace {

using namespace pollchain;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int run(const std::string& config_path) {
    auto cfg = node::load_node_config(config_path);
    if (!cfg) {
        std::cerr << "error: " << cfg.error() << "\n";
        return 2;
    }
    if (auto r = node::apply_env_overrides(cfg.value(), node::process_env); !r) {
        std::cerr << "error: " << r.error() << "\n";
        return 2;
    }
    std::ifstream gin(cfg->genesis_path);
    if (!gin) {
        std::cerr << "error: cannot read genesis " << cfg->genesis_path << "\n";
        return 2;
    }
    nlohmann::json gj;
    try {
        gj = nlohmann::json::parse(gin);
    } catch (const std::exception& e) {
        std::cerr << "error: genesis: " << e.what() << "\n";
        return 2;
    }
    auto genesis = chain::genesis_from_json(gj);
    if (!genesis) {
        std::cerr << "error: " << genesis.error() << "\n";
        return 2;
    }
    std::optional<crypto::KeyPair> validator;
    if (cfg->validator_key_path) {
        auto key = node::load_validator_key(*cfg->validator_key_path);
        if (!key) {
            std::cerr << "error: " << key.error() << "\n";
            return 2;
        }
        validator = key.value();
    }

    auto n = node::Node::open(cfg.value(), genesis.value(), validator);
    if (!n) {
        std::cerr << "error: " << n.error() << "\n";
        return 3;
    }
    auto& live = *n.value();

    httplib::Server server;
    node::install_routes(server, live);
    if (!server.bind_to_port(cfg->host, cfg->port)) {
        std::cerr << "error: cannot listen on " << cfg->host << ":" << cfg->port << "\n";
        return 4;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    std::thread producer([&] {
        while (!g_stop) {
            if (cfg->clock == node::ClockMode::System) live.tick();
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        server.stop();
    });
    auto status = live.read([](const node::Node::View& v) { return std::make_pair(v.tree.tip_height(), v.current_slot); });
    std::cerr << "listening on " << cfg->host << ":" << cfg->port << " height " << status.first << " slot "
              << status.second << "\n";
    server.listen_after_bind();
    g_stop = true;
    producer.join();
    return 0;
}

int init(const std::filesystem::path& dir, const std::vector<std::string>& funds, bool manual, int port,
         std::int64_t slot_ms) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (fs::exists(dir / "node.json")) {
        std::cerr << "error: " << (dir / "node.json") << " already exists\n";
        return 2;
    }
    Hash256 seed{};
    crypto::random_bytes(seed);
    auto key = crypto::generate_keys(seed).value();
    auto validator = crypto::Address::from_public_key(key.public_key());

    chain::GenesisConfig g;
    auto now = node::system_time_ms();
    g.timestamp_ms = now - now % slot_ms;
    g.validators = {validator};
    g.allocations.push_back({validator, 1'000'000});
    for (const auto& f : funds) {
        auto eq = f.find('=');
        auto addr = crypto::Address::from_string(f.substr(0, eq));
        if (eq == std::string::npos || !addr) {
            std::cerr << "error: --fund expects ADDRESS=AMOUNT, got " << f << "\n";
            return 2;
        }
        g.allocations.push_back({addr.value(), std::stoll(f.substr(eq + 1))});
    }
    if (auto v = g.validate(); !v) {
        std::cerr << "error: " << v.error() << "\n";
        return 2;
    }

    node::NodeConfig cfg;
    cfg.data_dir = "data";
    cfg.port = port;
    cfg.genesis_path = "genesis.json";
    cfg.validator_key_path = "validator.key";
    cfg.clock = manual ? node::ClockMode::Manual : node::ClockMode::System;
    cfg.consensus.slot_duration_ms = slot_ms;

    if (auto r = node::write_validator_key(dir / "validator.key", seed); !r) {
        std::cerr << "error: " << r.error() << "\n";
        return 3;
    }
    std::ofstream(dir / "genesis.json") << chain::genesis_to_json(g).dump(2) << "\n";
    std::ofstream(dir / "node.json") << node::node_config_to_json(cfg).dump(2) << "\n";
    std::cout << "validator " << validator.to_string() << "\n"
              << "config    " << (dir / "node.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poll chain node", "pollchain-node"};
    app.require_subcommand(1);

    std::string config = "node.json";
    auto* run_cmd = app.add_subcommand("run", "Serve the HTTP API and produce blocks");
    run_cmd->add_option("-c,--config", config, "Node config file")->check(CLI::ExistingFile);

    std::string dir;
    std::vector<std::string> funds;
    bool manual = false;
    int port = 8645;
    std::int64_t slot_ms = 60'000;
    auto* init_cmd = app.add_subcommand("init", "Create a single-validator devnet directory");
    init_cmd->add_option("dir", dir, "Target directory")->required();
    init_cmd->add_option("--fund", funds, "ADDRESS=AMOUNT genesis allocation (repeatable)");
    init_cmd->add_flag("--manual-clock", manual, "Slots advance only via POST /admin/advance");
    init_cmd->add_option("--port", port, "Listen port");
    init_cmd->add_option("--slot-ms", slot_ms, "Slot duration")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    if (*run_cmd) return run(config);
    return init(dir, funds, manual, port, slot_ms);
}
