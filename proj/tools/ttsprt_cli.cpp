#include <string>
#include <vector>

#include "ttsprt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ttsprt::cli::run(args);
}
