#include "clinewave/cli.hpp"

int main(int argc, char** argv) { return clinewave::cli_main(argc, argv); }
