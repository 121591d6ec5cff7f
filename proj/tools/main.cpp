#include "tubelink/cli.hpp"

int main(int argc, char** argv) { return tubelink::cli::run(argc, argv); }
