#include "cli.hpp"

int main(int argc, char** argv) { return nnreach::cli::run(argc, argv); }
