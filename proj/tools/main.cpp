#include <vector>

#include "sabci/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sabci::cli::run(args);
}
