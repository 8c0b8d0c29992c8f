#include "postlab/cli.hpp"

int main(int argc, char** argv) { return postlab::run_cli(argc, argv); }
