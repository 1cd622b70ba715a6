#include "cli.hpp"

int main(int argc, char** argv) { return qmarg::run_cli(argc, argv); }
