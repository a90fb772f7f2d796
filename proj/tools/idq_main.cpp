#include "idq/cli.hpp"

int main(int argc, char** argv) { return idq::cli::run(argc, argv); }
