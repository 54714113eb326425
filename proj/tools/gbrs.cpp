#include "gbrs/cli.hpp"

int main(int argc, char** argv) { return gbrs::cli::run_cli(argc, argv); }
