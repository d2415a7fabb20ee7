#include "rnca/cli.hpp"

int main(int argc, char** argv) { return rnca::cli::run(argc, argv); }
