#include "seqmon/commands.hpp"

int main(int argc, char** argv) { return seqmon::run_cli(argc, argv); }
