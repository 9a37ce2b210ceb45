#include "ynkit/cli.hpp"

int main(int argc, char** argv) { return ynk::run_cli(argc, argv); }
