#include "commands.hpp"

int main(int argc, char** argv) {
    return cbfrl::cli::run_cli(argc, argv);
}
