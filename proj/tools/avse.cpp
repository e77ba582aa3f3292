#include "avse/cli.hpp"

int main(int argc, char** argv) { return avse::cli::run(argc, argv); }
