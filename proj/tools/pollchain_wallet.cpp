#include <cstdlib>
#include <iostream>

#include "pollchain/cli/wallet.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        return v ? std::optional<std::string>(v) : std::nullopt;
    };
    return pollchain::cli::run(args, std::cout, std::cerr, env);
}
