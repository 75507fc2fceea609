#include "frtm/cli.hpp"

int main(int argc, char** argv) { return frtm::run_cli(argc, argv); }
