#include "tdamal/cli.hpp"

int main(int argc, char** argv) { return tdamal::cli::run(argc, argv); }
