#pragma once

#include "lae/model.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace lae {

inline constexpr int kMaxAge = 100;
inline constexpr int kNumAges = kMaxAge + 1;

struct Sample {
  std::vector<double> features;
  int age = 0;
};

/// Row-major feature matrix plus one integer age per row.
class Dataset {
public:
  Dataset() = default;
  Dataset(Matrix features, std::vector<int> ages);

  std::size_t size() const noexcept { return ages_.size(); }
  bool empty() const noexcept { return ages_.empty(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& ages() const noexcept { return ages_; }
  Sample sample(std::size_t row) const;

  Dataset subset(std::span<const std::size_t> rows) const;
  /// Copies the selected feature rows into `out` (resized as needed).
  void gather(std::span<const std::size_t> rows, Matrix& out) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

private:
  Matrix features_;
  std::vector<int> ages_;
};

enum class AgeProfile { LognormalMiviaLike, Uniform, Custom };

struct GenSpec {
  std::size_t d_in = 16;
  std::size_t n_total = 50000;
  AgeProfile profile = AgeProfile::LognormalMiviaLike;
  /// One weight per age 0..100 when profile == Custom.
  std::vector<double> custom_weights;
  double noise_std = 1.5;
  std::uint64_t seed = 0;
};

/// Unnormalised sampling weight for every age 0..100.
///
/// The long-tailed default is a log-normal bump with its mode at 30 years
/// and shape 0.35, scaled to peak at 1, plus a floor of 0.01 so that every
/// age keeps a thin tail of samples.
std::vector<double> age_profile_weights(const GenSpec& spec);

/// Basis phi(a) for a = age / 100:
/// (1, a, a^2, a^3, sin 2pi a, cos 2pi a, sin 4pi a, cos 4pi a).
std::array<double, 8> age_basis(int age);

/// Fixed d_in x 8 mixing matrix drawn from the spec's seed: a random
/// matrix with orthonormal columns scaled by 4, so one year of age moves
/// the clean feature vector by about 0.56 regardless of seed. For d_in < 8
/// the Gaussian draw is used directly, scaled by 4/sqrt(8).
Matrix mixing_matrix(const GenSpec& spec);

/// Ages from the profile; features x = W phi(age/100) + N(0, noise_std^2 I).
Dataset generate(const GenSpec& spec);

/// Seeded shuffle, then the first round(ratio * n) rows go to the training side.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_ratio, std::uint64_t seed);

/// CSV with header `age,f0,...,f{d-1}`; values written in shortest
/// round-trip form so the file reproduces every double bitwise.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// Largest class count divided by the smallest non-zero class count.
double imbalance_factor(std::span<const int> ages);

} // namespace lae
