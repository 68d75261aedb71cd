#include "surfenv/cli.hpp"

int main(int argc, char** argv) { return surfenv::cli::run(argc, argv); }
