#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lae {

struct AgeRange {
  int lo; // inclusive
  int hi; // inclusive

  bool contains(int age) const noexcept { return age >= lo && age <= hi; }
};

inline constexpr std::size_t kNumAgeGroups = 8;
using AgeGroups = std::array<AgeRange, kNumAgeGroups>;

/// Contest age groups 1-10, 11-20, ..., 61-70, 71-81.
inline constexpr AgeGroups kContestAgeGroups = {{
    {1, 10}, {11, 20}, {21, 30}, {31, 40}, {41, 50}, {51, 60}, {61, 70}, {71, 81},
}};

using GroupMaes = std::array<std::optional<double>, kNumAgeGroups>;

struct MetricsReport {
  double mae_overall = 0.0;
  GroupMaes group_maes{};
  double sigma = 0.0;
  double aar = 0.0;
  std::size_t sample_count = 0;
};

/// Mean absolute error. Throws DomainError on empty or mismatched input.
double mae(std::span<const double> predictions, std::span<const int> labels);

/// Per-group MAE by true age; empty groups are nullopt. Labels outside every
/// group are ignored here but still count toward mae().
GroupMaes group_maes(std::span<const double> predictions, std::span<const int> labels,
                     const AgeGroups& groups = kContestAgeGroups);

/// sqrt(sum_j (MAE_j - MAE)^2 / 8). An absent group contributes zero
/// deviation; the denominator stays 8.
double sigma(const GroupMaes& groups, double mae_overall);

/// max(0, 7 - mae) + max(0, 3 - sigma)
double aar(double mae_overall, double sigma);

MetricsReport compute_report(std::span<const double> predictions, std::span<const int> labels);

/// Flat `key = value` document: mae, mae_group_1..8 ("absent" when empty),
/// sigma, aar, sample_count.
void write_report_kv(std::ostream& out, const MetricsReport& report);
MetricsReport read_report_kv(std::istream& in);

struct LabeledReport {
  std::string label;
  MetricsReport report;
};

/// Aligned table with columns Model, MAE, MAE1, MAE3, MAE8, sigma, AAR.
void write_report_table(std::ostream& out, std::span<const LabeledReport> rows, int precision = 2);

/// Several reports in one document: the table as `#` comment lines, then
/// one `[label]` section of key-value pairs per row.
void write_labeled_reports(std::ostream& out, std::span<const LabeledReport> rows, int precision = 2);
/// Reads either a sectioned document or a flat one (a single row with an
/// empty label).
std::vector<LabeledReport> read_labeled_reports(std::istream& in);

} // namespace lae
