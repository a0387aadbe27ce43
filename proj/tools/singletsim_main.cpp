#include <iostream>
#include <string>
#include <vector>

#include "singletsim/driver.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto outcome = singletsim::driver::parse_command_line(args);
    if (!outcome.config) {
        if (outcome.exit_code == 0) {
            std::cout << outcome.message;
        } else {
            std::cerr << "error: " << outcome.message << '\n';
        }
        return outcome.exit_code;
    }
    return singletsim::driver::execute(*outcome.config);
}
