#include "commands.hpp"

int main(int argc, char** argv) { return ipop::cli::main_entry(argc, argv); }
