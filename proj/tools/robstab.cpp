#include "robstab/cli.hpp"

int main(int argc, char** argv) { return robstab::run_cli(argc, argv); }
