#include <saptlem/cli.hpp>

int main(int argc, char** argv) { return saptlem::cli_main(argc, argv); }
