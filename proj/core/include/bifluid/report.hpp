#pragma once

#include <string>
#include <vector>

namespace bifluid {

/// One named residual with its verdict.
struct Certificate {
  enum class Rule {
    AbsAtMost,   ///< pass iff |value| <= tolerance
    AtLeast,     ///< pass iff value >= -tolerance
    Info,        ///< always passes; recorded for the table
  };
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Rule rule = Rule::Info;
  bool passed = true;
  std::string detail;
};

struct CertificateReport {
  std::vector<Certificate> entries;

  void add_abs(std::string name, double value, double tolerance, std::string detail = {});
  void add_at_least(std::string name, double value, double tolerance, std::string detail = {});
  void add_info(std::string name, double value, std::string detail = {});
  /// Appends a precomputed verdict (signed conditions with custom logic).
  void add_verdict(std::string name, double value, double tolerance, bool passed,
                   std::string detail = {});

  bool all_passed() const;
  std::vector<std::string> failures() const;
  const Certificate* find(const std::string& name) const;
};

}  // namespace bifluid
