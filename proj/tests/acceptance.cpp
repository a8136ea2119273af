// Acceptance criteria A1-A11. With no arguments every criterion runs; otherwise only the listed ids.
#include <cstdio>
#include <string>
#include <vector>

#include "blowup_lab/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> ids(argv + 1, argv + argc);
  if (ids.empty()) ids = blab::criterion_ids();
  blab::Workbench wb;
  int failed = 0;
  for (const auto& id : ids) {
    auto r = blab::run_criterion(id, wb);
    std::printf("%s %s (%.1f s, budget %.0f s)\n", id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds, r.budget);
    for (const auto& c : r.checks)
      std::printf("    %-4s %-48s %.6g  [%s]\n", c.pass ? "ok" : "MISS", c.name.c_str(), c.value, c.bound.c_str());
    if (!r.note.empty()) std::printf("    note: %s\n", r.note.c_str());
    if (!r.error.empty()) std::printf("    error: %s\n", r.error.c_str());
    if (!r.pass) ++failed;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
