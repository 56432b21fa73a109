#include "lgan/cli.hpp"

int main(int argc, char** argv) { return lgan::cli::run(argc, argv); }
