#include "atomlaser/cli.hpp"

int main(int argc, char** argv) { return atomlaser::cli::run(argc, argv); }
