#include "ridgekit/cli.hpp"

int main(int argc, char** argv) { return ridgekit::cli_main(argc, argv); }
