#include "commands.hpp"

int main(int argc, char** argv) { return fgs::cli::run(argc, argv); }
