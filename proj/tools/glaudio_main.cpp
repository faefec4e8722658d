#include "glaudio/cli.hpp"

int main(int argc, char** argv) { return glaudio::run(argc, argv); }
