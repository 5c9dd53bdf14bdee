#include "leodop/cli.hpp"

int main(int argc, char** argv) { return leodop::dispatch(argc, argv); }
