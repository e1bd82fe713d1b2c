#include "cplxinterp/harness/cli.hpp"

int main(int argc, char** argv) { return cplxinterp::harness::run_cli(argc, argv); }
