#include "relnet/cli.hpp"

int main(int argc, char** argv) { return relnet::cli::run(argc, argv); }
