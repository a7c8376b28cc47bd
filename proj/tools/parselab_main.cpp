#include "parselab/cli.hpp"

int main(int argc, char** argv) { return parselab::cli::run(argc, argv); }
