#include "kermit/cli.hpp"

int main(int argc, char** argv) { return kermit::cli::main(argc, argv); }
