#include "rbmm/cli/commands.hpp"

int main(int argc, char** argv) { return rbmm::cli::main_entry(argc, argv); }
