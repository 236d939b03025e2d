#include "tromux/cli.hpp"

int main(int argc, char** argv) { return tromux::run_cli(argc, argv); }
