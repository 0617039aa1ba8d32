// Shared pass/fail report for identity checks. Reports are sorted by
// (identity, arity, word) before serialization so output is deterministic.
#pragma once

#include <string>
#include <vector>

namespace hdb {

struct Check {
  std::string identity;
  int arity = 0;
  std::string word;
  std::string lhs, rhs;
  bool pass = true;
};

struct CheckReport {
  bool ok = true;
  std::vector<Check> checks;

  void add(Check c) {
    ok = ok && c.pass;
    checks.push_back(std::move(c));
  }
  void pass(const std::string& identity, int arity = 0, const std::string& word = "") {
    add({identity, arity, word, "", "", true});
  }
  void fail(const std::string& identity, int arity = 0, const std::string& word = "",
            const std::string& lhs = "", const std::string& rhs = "") {
    add({identity, arity, word, lhs, rhs, false});
  }
  void merge(const CheckReport& o) {
    ok = ok && o.ok;
    checks.insert(checks.end(), o.checks.begin(), o.checks.end());
  }
  // First failing check, if any.
  const Check* first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }
  void sort_checks();
};

}  // namespace hdb
