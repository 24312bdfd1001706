#include "babelkit/cli.hpp"

int main(int argc, char** argv) { return babelkit::run_cli(argc, argv); }
