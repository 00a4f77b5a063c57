#include "cli.hpp"

int main(int argc, char** argv) { return bsmmr::cli::run(argc, argv); }
