#include <string>
#include <vector>

#include "scaleseg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return scaleseg::run_cli(args);
}
