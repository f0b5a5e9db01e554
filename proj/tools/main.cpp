// SPDX-License-Identifier: Apache-2.0
#include "paircal/cli.hpp"

int main(int argc, char** argv) { return paircal::cli::run(argc, argv); }
