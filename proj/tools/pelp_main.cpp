#include "pelp/cli.hpp"

int main(int argc, char** argv) { return pelp::run_cli(argc, argv); }
