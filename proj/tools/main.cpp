#include "gptpinn/cli.hpp"

int main(int argc, char** argv) { return gptpinn::cli_dispatch(argc, argv); }
