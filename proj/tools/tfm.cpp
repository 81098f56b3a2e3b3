#include "tfm/cli.hpp"

int main(int argc, char** argv) { return tfm::cli::run(argc, argv); }
