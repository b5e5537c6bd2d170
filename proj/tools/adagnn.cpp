#include "adagnn/cli.hpp"

int main(int argc, char** argv) { return adagnn::cli::run(argc, argv); }
