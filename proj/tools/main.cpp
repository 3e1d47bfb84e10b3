#include "agdcert/cli.hpp"

int main(int argc, char** argv) { return agdcert::run_main(argc, argv); }
