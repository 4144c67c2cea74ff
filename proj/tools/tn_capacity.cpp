#include "cli_app.hpp"

int main(int argc, char** argv) { return tncap::cli::run(argc, argv, std::cout, std::cerr); }
