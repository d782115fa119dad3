#include <tori/cli.hpp>

int main(int argc, char** argv) { return tori::cli_dispatch(argc, argv); }
