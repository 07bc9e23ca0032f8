#include "sagda/harness.hpp"

int main(int argc, char** argv) { return sagda::cli_run(argc, argv); }
