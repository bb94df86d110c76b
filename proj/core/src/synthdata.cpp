#include "lae/synthdata.hpp"

#include "lae/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

namespace lae {

namespace {

constexpr double kProfileMode = 30.0;
constexpr double kProfileShape = 0.35;
constexpr double kProfileFloor = 0.01;
constexpr double kMixingGain = 4.0;

constexpr std::uint64_t kMixingStream = 1;
constexpr std::uint64_t kAgeStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kSplitStream = 4;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

} // namespace

Dataset::Dataset(Matrix features, std::vector<int> ages) : features_(std::move(features)), ages_(std::move(ages)) {
  if (static_cast<std::size_t>(features_.rows()) != ages_.size()) {
    throw DomainError("feature rows and ages differ in count");
  }
  for (std::size_t i = 0; i < ages_.size(); ++i) {
    if (ages_[i] < 0 || ages_[i] > kMaxAge) {
      throw DomainError("age " + std::to_string(ages_[i]) + " at row " + std::to_string(i) + " outside [0, 100]");
    }
  }
}

Sample Dataset::sample(std::size_t row) const {
  const auto r = static_cast<Eigen::Index>(row);
  Sample s;
  s.features.assign(features_.row(r).data(), features_.row(r).data() + features_.cols());
  s.age = ages_.at(row);
  return s;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix f;
  gather(rows, f);
  std::vector<int> a;
  a.reserve(rows.size());
  for (std::size_t r : rows) {
    a.push_back(ages_.at(r));
  }
  return Dataset(std::move(f), std::move(a));
}

void Dataset::gather(std::span<const std::size_t> rows, Matrix& out) const {
  out.resize(static_cast<Eigen::Index>(rows.size()), features_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(rows[i]));
  }
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.ages_ == b.ages_ && a.features_.rows() == b.features_.rows() &&
         a.features_.cols() == b.features_.cols() && a.features_ == b.features_;
}

std::vector<double> age_profile_weights(const GenSpec& spec) {
  std::vector<double> w(kNumAges, 1.0);
  switch (spec.profile) {
  case AgeProfile::Uniform:
    break;
  case AgeProfile::Custom:
    if (spec.custom_weights.size() != static_cast<std::size_t>(kNumAges)) {
      throw ConfigError("custom age profile needs exactly 101 weights");
    }
    for (double v : spec.custom_weights) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("custom age weights must be finite and non-negative");
      }
    }
    if (std::accumulate(spec.custom_weights.begin(), spec.custom_weights.end(), 0.0) <= 0.0) {
      throw ConfigError("custom age weights sum to zero");
    }
    w = spec.custom_weights;
    break;
  case AgeProfile::LognormalMiviaLike: {
    const double s2 = kProfileShape * kProfileShape;
    const double mu = std::log(kProfileMode) + s2;
    // Density at the mode, used to scale the peak to 1.
    const double peak = std::exp(-(std::log(kProfileMode) - mu) * (std::log(kProfileMode) - mu) / (2 * s2)) /
                        kProfileMode;
    for (int age = 0; age < kNumAges; ++age) {
      const double x = age + 0.5;
      const double d = std::log(x) - mu;
      w[static_cast<std::size_t>(age)] = std::exp(-d * d / (2 * s2)) / x / peak + kProfileFloor;
    }
    break;
  }
  }
  return w;
}

std::array<double, 8> age_basis(int age) {
  const double a = static_cast<double>(age) / 100.0;
  const double t = 2.0 * M_PI * a;
  return {1.0, a, a * a, a * a * a, std::sin(t), std::cos(t), std::sin(2 * t), std::cos(2 * t)};
}

Matrix mixing_matrix(const GenSpec& spec) {
  if (spec.d_in < 1) {
    throw ConfigError("d_in must be >= 1");
  }
  auto rng = stream_rng(spec.seed, kMixingStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(spec.d_in);
  Eigen::MatrixXd gaussian(rows, 8);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < 8; ++c) {
      gaussian(r, c) = normal(rng);
    }
  }
  if (rows < 8) {
    return kMixingGain * gaussian / std::sqrt(8.0);
  }
  // Orthonormal columns: the feature curve keeps the basis geometry, rotated
  // at random and scaled by kMixingGain.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, 8);
  return kMixingGain * q;
}

Dataset generate(const GenSpec& spec) {
  if (spec.n_total < 1) {
    throw ConfigError("n_total must be >= 1");
  }
  if (!(spec.noise_std >= 0.0)) {
    throw ConfigError("noise_std must be non-negative");
  }
  const Matrix mix = mixing_matrix(spec);
  const auto weights = age_profile_weights(spec);

  auto age_rng = stream_rng(spec.seed, kAgeStream);
  auto noise_rng = stream_rng(spec.seed, kNoiseStream);
  std::discrete_distribution<int> pick_age(weights.begin(), weights.end());
  std::normal_distribution<double> noise(0.0, 1.0);

  // Noise-free feature vector for every age, so equal ages share it bitwise.
  Matrix clean(kNumAges, mix.rows());
  for (int age = 0; age < kNumAges; ++age) {
    const auto phi = age_basis(age);
    const Eigen::Map<const Eigen::Matrix<double, 8, 1>> basis(phi.data());
    clean.row(age) = (mix * basis).transpose();
  }

  const auto n = static_cast<Eigen::Index>(spec.n_total);
  Matrix features(n, mix.rows());
  std::vector<int> ages(spec.n_total);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int age = pick_age(age_rng);
    ages[static_cast<std::size_t>(i)] = age;
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      features(i, c) = clean(age, c) + (spec.noise_std > 0.0 ? spec.noise_std * noise(noise_rng) : 0.0);
    }
  }
  return Dataset(std::move(features), std::move(ages));
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw DomainError("train ratio must lie strictly between 0 and 1");
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw DomainError("split of " + std::to_string(n) + " samples at ratio " + format_double(train_ratio) +
                      " leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = stream_rng(seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), rng);
  const std::span<const std::size_t> all(order);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "age";
  for (std::size_t c = 0; c < data.dim(); ++c) {
    out << ",f" << c;
  }
  out << '\n';
  const Matrix& f = data.features();
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.ages()[i];
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      out << ',' << format_double(f(static_cast<Eigen::Index>(i), c));
    }
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("dataset file is empty; expected header 'age,f0,...'");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const auto header = split_commas(line);
  if (header.empty() || header[0] != "age") {
    throw FormatError("missing dataset header; expected 'age,f0,...'");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t c = 0; c < dim; ++c) {
    if (header[c + 1] != "f" + std::to_string(c)) {
      throw FormatError("bad header column '" + std::string(header[c + 1]) + "', expected f" + std::to_string(c));
    }
  }

  std::vector<int> ages;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(dim + 1) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    int age = 0;
    auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), age);
    if (res.ec != std::errc{} || res.ptr != fields[0].data() + fields[0].size()) {
      throw ParseError(line_no, "age '" + std::string(fields[0]) + "' is not an integer");
    }
    if (age < 0 || age > kMaxAge) {
      throw ParseError(line_no, "age " + std::to_string(age) + " outside [0, 100]");
    }
    ages.push_back(age);
    for (std::size_t c = 1; c <= dim; ++c) {
      double v = 0.0;
      auto r = std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), v);
      if (r.ec != std::errc{} || r.ptr != fields[c].data() + fields[c].size() || !std::isfinite(v)) {
        throw ParseError(line_no, "feature f" + std::to_string(c - 1) + " '" + std::string(fields[c]) +
                                      "' is not a finite number");
      }
      values.push_back(v);
    }
  }
  Matrix features(static_cast<Eigen::Index>(ages.size()), static_cast<Eigen::Index>(dim));
  if (!values.empty()) {
    std::copy(values.begin(), values.end(), features.data());
  }
  return Dataset(std::move(features), std::move(ages));
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_dataset_csv(out, data);
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open dataset " + path.string());
  }
  return read_dataset_csv(in);
}

double imbalance_factor(std::span<const int> ages) {
  std::vector<std::size_t> counts(kNumAges, 0);
  for (int a : ages) {
    if (a >= 0 && a <= kMaxAge) {
      ++counts[static_cast<std::size_t>(a)];
    }
  }
  std::size_t hi = 0;
  std::size_t lo = 0;
  for (std::size_t c : counts) {
    if (c == 0) {
      continue;
    }
    hi = std::max(hi, c);
    lo = lo == 0 ? c : std::min(lo, c);
  }
  if (lo == 0) {
    throw DomainError("imbalance factor of an empty label set");
  }
  return static_cast<double>(hi) / static_cast<double>(lo);
}

} // namespace lae
