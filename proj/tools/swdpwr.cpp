#include <iostream>

#include "swdpwr/cli.hpp"

int main(int argc, char** argv) {
    return swdpwr::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
