#include "coarsepoint/cli.hpp"

int main(int argc, char** argv) { return coarsepoint::cli::dispatch(argc, argv); }
