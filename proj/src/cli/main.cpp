// SPDX-License-Identifier: Apache-2.0
#include "fadechan/cli/commands.hpp"

int main(int argc, char** argv) { return fadechan::run_cli(argc, argv); }
