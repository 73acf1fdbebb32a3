// Runs the eleven acceptance criteria at N = 5 and prints one line each.

#include <cstdlib>

#include <fmt/format.h>

#include "skein/verify.hpp"

int main() {
  skein::VerifyConfig cfg;
  cfg.N = 5;
  cfg.jobs = 4;
  int failed = 0;
  for (int id = 1; id <= 11; ++id) {
    auto r = skein::run_criterion(id, cfg);
    if (!r.passed) ++failed;
    fmt::print("[{}] criterion {:2d}: {:<40} measured {:.3e} (tolerance {:.0e}) {:.2f} s  {}\n",
               r.passed ? "PASS" : "FAIL", r.id, r.title, r.measured, r.tolerance, r.seconds, r.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of 11 criteria passed\n", 11 - failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
