#include <cstdio>

#include "heunband/acceptance.hpp"

int main() {
  int failed = 0;
  for (const auto& r : heunband::run_acceptance()) {
    std::printf("%s\n", heunband::summary_line(r).c_str());
    for (const auto& f : r.failures) std::printf("    failed: %s\n", f.c_str());
    for (const auto& n : r.notes) std::printf("    note: %s\n", n.c_str());
    if (!r.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
