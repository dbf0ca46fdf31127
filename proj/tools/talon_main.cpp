#include "talon/cli.hpp"

int main(int argc, char** argv) { return talon::cli::run(argc, argv); }
