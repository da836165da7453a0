// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "mxemu/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mxemu::cli::run(args, std::cout, std::cerr);
}
