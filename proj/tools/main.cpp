#include "catrag/cli.hpp"

int main(int argc, char** argv) { return catrag::cli_main(argc, argv); }
