#include "metacure/cli/commands.hpp"

int main(int argc, char** argv) { return metacure::cli::run_cli(argc, argv); }
