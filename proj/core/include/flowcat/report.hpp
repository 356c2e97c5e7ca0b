#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flowcat {

// One named check with its outcome.  Validators collect these instead of
// throwing, so a caller can see every violation at once.
struct Check {
  std::string name;
  bool passed = true;
  std::string detail;  // offending strata / pairs / entries, empty when passed
};

struct Report {
  std::vector<Check> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  void add(std::string name, bool passed, std::string detail = "") {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }

  // Merge another report under a prefix, e.g. "d2/numeric".
  void absorb(const Report& other, const std::string& prefix) {
    for (const auto& c : other.checks)
      checks.push_back({prefix + "/" + c.name, c.passed, c.detail});
  }

  std::vector<Check> failures() const {
    std::vector<Check> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c);
    return out;
  }
};

inline std::ostream& operator<<(std::ostream& os, const Report& r) {
  for (const auto& c : r.checks) {
    os << (c.passed ? "  ok   " : "  FAIL ") << c.name;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  return os;
}

}  // namespace flowcat
