#include "cli.hpp"

int main(int argc, char** argv) { return heunband::cli::main_entry(argc, argv); }
