#include "incvol/cli.hpp"

int main(int argc, char** argv) { return incvol::cli::run(argc, argv); }
