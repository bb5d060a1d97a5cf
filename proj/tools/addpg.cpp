#include "addpg/harness/harness.hpp"

int main(int argc, char** argv) { return addpg::harness::cli_main(argc, argv); }
