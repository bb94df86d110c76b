#include "lae/selfcheck.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace {

const lae::CheckResult* find(const lae::SelfcheckReport& r, const std::string& prefix) {
  auto it = std::find_if(r.checks.begin(), r.checks.end(),
                         [&](const lae::CheckResult& c) { return c.name.rfind(prefix, 0) == 0; });
  return it == r.checks.end() ? nullptr : &*it;
}

TEST(Selfcheck, CleanBuildPasses) {
  const auto report = lae::run_selfcheck();
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.checks.size(), 4u);
  for (const auto& c : report.checks) {
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  }
  const auto* aar = find(report, "AAR");
  ASSERT_NE(aar, nullptr);
  EXPECT_NE(aar->detail.find("7.18"), std::string::npos);
}

TEST(Selfcheck, PerturbedGradientFailsFiniteDifferences) {
  lae::SelfcheckOptions opts;
  opts.gradient_cases = 20;
  opts.gradient_fault = 1e-3;
  const auto report = lae::run_selfcheck(opts);
  EXPECT_FALSE(report.passed());
  const auto* fd = find(report, "finite-difference");
  ASSERT_NE(fd, nullptr);
  EXPECT_FALSE(fd->passed);
  const auto* sampler = find(report, "class-balanced");
  ASSERT_NE(sampler, nullptr);
  EXPECT_TRUE(sampler->passed);
}

} // namespace
