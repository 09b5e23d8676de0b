// Runs the nine acceptance checks, one pass/fail line each, with wall time
// against each check's budget. Exit status 1 if any line fails.
//
//   acceptance [filter]     filter: comma-separated ids or group names

#include "cvqft/verify.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

double budget_seconds(int id) {
  switch (id) {
    case 1: return 5;
    case 2: return 1;
    case 3: return 30;
    case 4: return 120;
    case 5: return 10;
    case 6: return 120;
    case 7: return 300;
    case 8: return 60;
    default: return 0;  // no budget
  }
}

std::string timing(double seconds, double budget) {
  char buf[64];
  if (budget > 0) std::snprintf(buf, sizeof buf, " [%.2f s, budget %.0f s]", seconds, budget);
  else std::snprintf(buf, sizeof buf, " [%.2f s]", seconds);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  cvqft::VerifyOptions options;
  if (argc > 1) options.filter = argv[1];

  std::vector<cvqft::CheckResult> done;
  bool all = true;
  for (int id : cvqft::selected_checks(options)) {
    const auto start = std::chrono::steady_clock::now();
    cvqft::CheckResult r;
    try {
      r = id == 9 ? cvqft::check_determinism(done, options) : cvqft::run_check(id, options);
    } catch (const std::exception& e) {
      r.id = id;
      r.group = cvqft::check_catalogue()[static_cast<std::size_t>(id - 1)].group;
      r.detail = std::string("threw ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double budget = budget_seconds(id);
    const bool in_time = budget == 0 || seconds <= budget;
    if (!in_time) r.detail += " OVER TIME";
    std::cout << cvqft::format_check_line({r.id, r.group, r.title, r.passed && in_time, r.detail, r.metrics})
              << timing(seconds, budget) << std::endl;
    all = all && r.passed && in_time;
    if (id != 9) done.push_back(r);
  }
  std::cout << (all ? "acceptance: all checks passed" : "acceptance: FAILED") << std::endl;
  return all ? 0 : 1;
}
