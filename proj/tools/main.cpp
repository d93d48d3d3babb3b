#include "cartier_lab/cli.hpp"

int main(int argc, char** argv) { return cartier_lab::cli::run(argc, argv); }
