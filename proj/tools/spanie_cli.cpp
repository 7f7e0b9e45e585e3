#include "spanie/cli.hpp"

int main(int argc, char** argv) { return spanie::cli::run(argc, argv); }
