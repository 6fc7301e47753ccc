#include "savint/cli.hpp"

int main(int argc, char** argv) { return savint::run_cli(argc, argv); }
