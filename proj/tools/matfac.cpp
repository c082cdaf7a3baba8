#include "matfac_cli.hpp"

int main(int argc, char** argv) { return matfac::cli::run(argc, argv); }
