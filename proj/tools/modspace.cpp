#include "modspace/cli.hpp"

int main(int argc, char** argv) { return modspace::run_cli(argc, argv); }
