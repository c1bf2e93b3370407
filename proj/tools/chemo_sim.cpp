#include <iostream>

#include "chemo/cli/app.hpp"

int main(int argc, char** argv) { return chemo::cli::run_app(argc, argv, std::cout, std::cerr); }
