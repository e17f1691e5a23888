#include "kvflux/cli.hpp"

int main(int argc, char** argv) { return kvflux::cli::main(argc, argv); }
