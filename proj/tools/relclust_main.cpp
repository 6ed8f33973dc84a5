#include "relclust/cli.hpp"

int main(int argc, char** argv) { return relclust::run_cli(argc, argv); }
