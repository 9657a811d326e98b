#include "tgode/cli.hpp"

int main(int argc, char** argv) { return tgode::cli::run_main(argc, argv); }
