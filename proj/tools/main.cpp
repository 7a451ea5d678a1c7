#include "anchorloc/cli.hpp"

int main(int argc, char** argv) { return anchorloc::cli::run(argc, argv); }
