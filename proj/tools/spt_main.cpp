#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

void on_interrupt(int) {
    spt::cli::abort_flag().store(true);
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_interrupt);
    return spt::cli::run(argc, argv, std::cout, std::cerr);
}
