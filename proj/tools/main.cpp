#include "commands.hpp"

int main(int argc, char** argv) { return windgrid::cli::run(argc, argv); }
