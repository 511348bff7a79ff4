#include "surfgrow/cli.hpp"

int main(int argc, char** argv) { return surfgrow::cli::main(argc, argv); }
