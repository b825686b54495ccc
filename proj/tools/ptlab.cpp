#include "ptlab/cli.hpp"

int main(int argc, char** argv) { return ptlab::cli::run(argc, argv); }
