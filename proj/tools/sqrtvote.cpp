#include <sqrtvote/cli.hpp>

int main(int argc, char** argv) { return sqrtvote::cli::cli_main(argc, argv); }
