#include "moi/cli.hpp"

int main(int argc, char** argv) { return moi::cli::run_cli(argc, argv); }
