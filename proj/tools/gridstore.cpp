#include "gridstore/cli.hpp"

int main(int argc, char** argv) { return gridstore::cli_main(argc, argv); }
