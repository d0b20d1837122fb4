#include "kagome/cli.hpp"

int main(int argc, char** argv) { return kagome::run_cli(argc, argv); }
