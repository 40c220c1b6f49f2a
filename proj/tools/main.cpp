#include "harness.hpp"

int main(int argc, char **argv) { return rarc::cli::main(argc, argv); }
