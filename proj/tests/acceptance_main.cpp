// Runs every acceptance check and prints one line per check.
// Usage: dante_acceptance [check ...]

#include <cstdio>
#include <string>

#include "dante/acceptance.hpp"

int main(int argc, char** argv) {
  dante::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) options.only.emplace_back(argv[i]);
  int failed = 0;
  dante::run_acceptance(options, [&](const dante::CriterionResult& r) {
    if (!r.passed) ++failed;
    std::printf("%s %s (%.2fs): %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
