#include "lae/metrics.hpp"

#include "lae/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lae {

namespace {

void check_inputs(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.empty()) {
    throw DomainError("metrics need at least one sample");
  }
  if (predictions.size() != labels.size()) {
    throw DomainError("prediction/label length mismatch: " + std::to_string(predictions.size()) + " vs " +
                      std::to_string(labels.size()));
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError("report key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

} // namespace

double mae(std::span<const double> predictions, std::span<const int> labels) {
  check_inputs(predictions, labels);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    acc += std::abs(static_cast<double>(labels[i]) - predictions[i]);
  }
  return acc / static_cast<double>(predictions.size());
}

GroupMaes group_maes(std::span<const double> predictions, std::span<const int> labels, const AgeGroups& groups) {
  check_inputs(predictions, labels);
  std::array<double, kNumAgeGroups> sums{};
  std::array<std::size_t, kNumAgeGroups> counts{};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t j = 0; j < kNumAgeGroups; ++j) {
      if (groups[j].contains(labels[i])) {
        sums[j] += std::abs(static_cast<double>(labels[i]) - predictions[i]);
        ++counts[j];
        break;
      }
    }
  }
  GroupMaes out{};
  for (std::size_t j = 0; j < kNumAgeGroups; ++j) {
    if (counts[j] > 0) {
      out[j] = sums[j] / static_cast<double>(counts[j]);
    }
  }
  return out;
}

double sigma(const GroupMaes& groups, double mae_overall) {
  double acc = 0.0;
  bool any = false;
  for (const auto& g : groups) {
    if (g) {
      const double d = *g - mae_overall;
      acc += d * d;
      any = true;
    }
  }
  if (!any) {
    throw DomainError("sigma needs at least one populated age group");
  }
  return std::sqrt(acc / static_cast<double>(kNumAgeGroups));
}

double aar(double mae_overall, double sigma) {
  return std::max(0.0, 7.0 - mae_overall) + std::max(0.0, 3.0 - sigma);
}

MetricsReport compute_report(std::span<const double> predictions, std::span<const int> labels) {
  MetricsReport r;
  r.mae_overall = mae(predictions, labels);
  r.group_maes = group_maes(predictions, labels);
  r.sigma = sigma(r.group_maes, r.mae_overall);
  r.aar = aar(r.mae_overall, r.sigma);
  r.sample_count = predictions.size();
  return r;
}

void write_report_kv(std::ostream& out, const MetricsReport& report) {
  out << "mae = " << format_double(report.mae_overall) << '\n';
  for (std::size_t j = 0; j < kNumAgeGroups; ++j) {
    out << "mae_group_" << (j + 1) << " = "
        << (report.group_maes[j] ? format_double(*report.group_maes[j]) : std::string("absent")) << '\n';
  }
  out << "sigma = " << format_double(report.sigma) << '\n';
  out << "aar = " << format_double(report.aar) << '\n';
  out << "sample_count = " << report.sample_count << '\n';
}

namespace {

MetricsReport report_from_kv(const std::map<std::string, std::string>& kv) {
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw FormatError("report is missing key '" + key + "'");
    }
    return it->second;
  };
  MetricsReport r;
  r.mae_overall = parse_double("mae", need("mae"));
  for (std::size_t j = 0; j < kNumAgeGroups; ++j) {
    const std::string key = "mae_group_" + std::to_string(j + 1);
    const auto& v = need(key);
    if (v != "absent") {
      r.group_maes[j] = parse_double(key, v);
    }
  }
  r.sigma = parse_double("sigma", need("sigma"));
  r.aar = parse_double("aar", need("aar"));
  r.sample_count = static_cast<std::size_t>(parse_double("sample_count", need("sample_count")));
  return r;
}

} // namespace

MetricsReport read_report_kv(std::istream& in) {
  const auto rows = read_labeled_reports(in);
  if (rows.size() != 1) {
    throw FormatError("expected a single report, found " + std::to_string(rows.size()));
  }
  return rows.front().report;
}

std::vector<LabeledReport> read_labeled_reports(std::istream& in) {
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') {
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      sections.emplace_back(line.substr(1, line.size() - 2), std::map<std::string, std::string>{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("report line without '=': " + line);
    }
    if (sections.empty()) {
      sections.emplace_back(std::string{}, std::map<std::string, std::string>{});
    }
    sections.back().second[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  std::vector<LabeledReport> out;
  for (const auto& [label, kv] : sections) {
    out.push_back({label, report_from_kv(kv)});
  }
  return out;
}

void write_labeled_reports(std::ostream& out, std::span<const LabeledReport> rows, int precision) {
  std::ostringstream table;
  write_report_table(table, rows, precision);
  std::istringstream lines(table.str());
  std::string line;
  while (std::getline(lines, line)) {
    out << "# " << line << '\n';
  }
  for (const auto& row : rows) {
    out << "\n[" << row.label << "]\n";
    write_report_kv(out, row.report);
  }
}

void write_report_table(std::ostream& out, std::span<const LabeledReport> rows, int precision) {
  std::size_t label_width = 5;
  for (const auto& row : rows) {
    label_width = std::max(label_width, row.label.size());
  }
  constexpr int kCol = 8;
  auto cell = [&](std::ostringstream& os, const std::optional<double>& v) {
    if (v) {
      os << std::setw(kCol) << std::fixed << std::setprecision(precision) << *v;
    } else {
      os << std::setw(kCol) << "/";
    }
  };
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_width)) << "Model" << std::right;
  for (const char* h : {"MAE", "MAE1", "MAE3", "MAE8", "sigma", "AAR"}) {
    os << std::setw(kCol) << h;
  }
  os << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << std::left << std::setw(static_cast<int>(label_width)) << row.label << std::right;
    cell(os, r.mae_overall);
    cell(os, r.group_maes[0]);
    cell(os, r.group_maes[2]);
    cell(os, r.group_maes[7]);
    cell(os, r.sigma);
    cell(os, r.aar);
    os << '\n';
  }
  out << os.str();
}

} // namespace lae
