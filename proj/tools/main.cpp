#include "fmest/cli.hpp"

int main(int argc, char** argv) { return fmest::cli::run(argc, argv); }
