// Runs the acceptance battery and exits 0 only if every criterion passes.

#include <cstdio>
#include <cstring>
#include <iostream>

#include "kslab/acceptance.hpp"

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      quick = true;
    } else {
      std::fprintf(stderr, "usage: %s [--quick]\n", argv[0]);
      return 2;
    }
  }
  const auto which =
      quick ? kslab::acceptance::quick_set() : kslab::acceptance::full_set();
  const auto results = kslab::acceptance::run_set(which, std::cout);
  return kslab::acceptance::exit_code(results);
}
