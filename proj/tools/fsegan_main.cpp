#include "fsegan/cli/cli.hpp"

int main(int argc, char** argv) { return fsegan::cli::run(argc, argv); }
