#include "plnav/cli.hpp"

int main(int argc, char** argv) { return plnav::cli_main(argc, argv); }
