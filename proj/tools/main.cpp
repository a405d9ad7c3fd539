#include "cli/commands.hpp"

int main(int argc, char** argv) { return frontlab::cli::run_cli(argc, argv); }
