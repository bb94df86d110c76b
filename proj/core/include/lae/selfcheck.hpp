#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lae {

struct SelfcheckOptions {
  /// Random (network, batch, loss) instances for the finite-difference suite.
  std::size_t gradient_cases = 100;
  /// Added to every analytic logit-gradient component before backprop.
  /// Non-zero only for fault-injection tests of the check itself.
  double gradient_fault = 0.0;
  std::uint64_t seed = 2021;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckReport {
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Finite-difference gradient suite (both losses), class-balanced sampler
/// frequency test and the published AAR arithmetic.
SelfcheckReport run_selfcheck(const SelfcheckOptions& options = {});

} // namespace lae
