#include "pathint/cli.hpp"

int main(int argc, char** argv) { return pathint::cli::run(argc, argv); }
