// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include "purcellkit/cli.hpp"

int main(int argc, char **argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return purcellkit::cli::Run(args, std::cout, std::cerr);
}
