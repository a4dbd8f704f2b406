#include "dfgt/cli.hpp"

int main(int argc, char** argv) { return dfgt::run_cli(argc, argv); }
