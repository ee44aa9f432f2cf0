#include "hab/cli.hpp"

int main(int argc, char** argv) { return hab::cli::run(argc, argv); }
