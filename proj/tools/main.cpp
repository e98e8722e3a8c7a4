#include "discwalk/cli.hpp"

int main(int argc, char** argv) { return discwalk::cli::main(argc, argv); }
