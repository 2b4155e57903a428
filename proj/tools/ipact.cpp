// SPDX-License-Identifier: Apache-2.0
#include "ipact/cli.hpp"

int main(int argc, char** argv) { return ipact::cli::run(argc, argv); }
