#include "chaoscomm/cli/commands.hpp"

int main(int argc, char** argv) { return chaoscomm::cli::cli_main(argc, argv); }
