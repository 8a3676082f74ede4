#include "tdlab/cli/cli.hpp"

int main(int argc, char** argv) { return tdlab::cli::run_cli(argc, argv); }
