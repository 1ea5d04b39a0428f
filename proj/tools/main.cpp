// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "hogfusion/cli.hpp"

int main(int argc, char** argv) { return hogfusion::cli::run_cli(argc, argv, std::cout, std::cerr); }
