#include <tordisc/cli.hpp>

int main(int argc, char** argv) { return tordisc::cli::run(argc, argv); }
