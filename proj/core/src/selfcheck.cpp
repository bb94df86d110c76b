#include "lae/selfcheck.hpp"

#include "lae/losses.hpp"
#include "lae/metrics.hpp"
#include "lae/model.hpp"
#include "lae/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lae {

namespace {

constexpr int kFdClasses = 5;
constexpr double kFdStep = 1e-6;
constexpr double kFdTolerance = 1e-5;
constexpr double kFdScaleFloor = 1e-4;
constexpr double kKinkGap = 1e-4;

struct FdCase {
  Network net;
  Matrix batch;
  std::vector<int> ages;
  LossMode mode = LossMode::Representation;
  LossWeights weights;
};

double batch_loss(const FdCase& c) {
  const Matrix logits = forward(c.net, c.batch);
  double total = 0.0;
  std::vector<double> row(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    std::copy(logits.row(r).data(), logits.row(r).data() + logits.cols(), row.begin());
    const int age = c.ages[static_cast<std::size_t>(r)];
    const auto z = gaussian_label_distribution(age, 1.0, kFdClasses);
    total += loss_terms(c.mode, z.probs, age, softmax(row), c.weights).total;
  }
  return total / static_cast<double>(logits.rows());
}

/// True when some sample sits within kKinkGap of the l1 kink or some relu
/// input sits within kKinkGap of zero; finite differences are unreliable there.
bool near_kink(const FdCase& c) {
  ForwardCache cache;
  const Matrix logits = forward(c.net, c.batch, &cache);
  for (std::size_t l = 0; l + 1 < cache.pre_activations.size(); ++l) {
    if ((cache.pre_activations[l].array().abs() < kKinkGap).any()) {
      return true;
    }
  }
  std::vector<double> row(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    std::copy(logits.row(r).data(), logits.row(r).data() + logits.cols(), row.begin());
    const double yhat = expected_age(softmax(row));
    const double gap = std::abs(c.ages[static_cast<std::size_t>(r)] - yhat);
    if (gap < kKinkGap) {
      return true;
    }
  }
  return false;
}

GradientBuffer analytic_gradient(const FdCase& c, double fault) {
  ForwardCache cache;
  const Matrix logits = forward(c.net, c.batch, &cache);
  Matrix g(logits.rows(), logits.cols());
  std::vector<double> row(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    std::copy(logits.row(r).data(), logits.row(r).data() + logits.cols(), row.begin());
    const int age = c.ages[static_cast<std::size_t>(r)];
    const auto z = gaussian_label_distribution(age, 1.0, kFdClasses);
    const auto grad = loss_gradient_wrt_logits(c.mode, z.probs, age, softmax(row), c.weights);
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      g(r, k) = grad[static_cast<std::size_t>(k)] + fault;
    }
  }
  return backward(c.net, cache, g);
}

FdCase random_case(std::mt19937_64& rng, LossMode mode) {
  std::uniform_int_distribution<std::size_t> width(2, 6);
  std::uniform_int_distribution<int> age(0, kFdClasses - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> anchor(0.0, 1.5);

  const std::vector<std::size_t> arch = {width(rng), width(rng), width(rng), std::size_t{kFdClasses}};
  FdCase c;
  c.net = init_network(arch, rng());
  // Non-zero biases so the check also covers them.
  for (std::size_t l = 0; l < c.net.layers().size(); ++l) {
    auto& layer = c.net.mutable_layer(l);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias(i) = 0.3 * normal(rng);
    }
    layer.weights *= 2.0;
  }
  const std::size_t batch = 3;
  c.batch.resize(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(arch[0]));
  for (Eigen::Index i = 0; i < c.batch.size(); ++i) {
    c.batch.data()[i] = normal(rng);
  }
  for (std::size_t i = 0; i < batch; ++i) {
    c.ages.push_back(age(rng));
  }
  c.mode = mode;
  c.weights.lambda = 1.0;
  if (mode == LossMode::Classification) {
    c.weights.anchor_mae = anchor(rng);
  }
  return c;
}

/// Largest relative error over every parameter of the case.
double worst_relative_error(FdCase& c, double fault) {
  const GradientBuffer analytic = analytic_gradient(c, fault);
  double worst = 0.0;
  auto probe = [&](double& param, double a) {
    const double saved = param;
    param = saved + kFdStep;
    const double up = batch_loss(c);
    param = saved - kFdStep;
    const double down = batch_loss(c);
    param = saved;
    const double numeric = (up - down) / (2.0 * kFdStep);
    const double scale = std::max({std::abs(a), std::abs(numeric), kFdScaleFloor});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  };
  for (std::size_t l = 0; l < c.net.layers().size(); ++l) {
    auto& layer = c.net.mutable_layer(l);
    const auto& g = analytic.layers[l];
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      probe(layer.weights.data()[i], g.weights.data()[i]);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      probe(layer.bias.data()[i], g.bias.data()[i]);
    }
  }
  return worst;
}

CheckResult gradient_check(const SelfcheckOptions& options, LossMode mode) {
  std::mt19937_64 rng(options.seed + (mode == LossMode::Classification ? 1 : 0));
  CheckResult out;
  out.name = mode == LossMode::Representation ? "finite-difference gradients (representation loss)"
                                              : "finite-difference gradients (classification loss)";
  std::size_t tested = 0;
  std::size_t failed = 0;
  double worst = 0.0;
  std::size_t attempts = 0;
  while (tested < options.gradient_cases && attempts < 20 * options.gradient_cases + 100) {
    ++attempts;
    FdCase c = random_case(rng, mode);
    if (near_kink(c)) {
      continue;
    }
    const double err = worst_relative_error(c, options.gradient_fault);
    worst = std::max(worst, err);
    if (!(err < kFdTolerance)) {
      ++failed;
    }
    ++tested;
  }
  std::ostringstream os;
  os << tested << " cases, " << failed << " failed, worst relative error " << worst;
  out.detail = os.str();
  out.passed = failed == 0 && tested == options.gradient_cases;
  return out;
}

CheckResult sampler_check(std::uint64_t seed) {
  std::vector<int> labels;
  labels.insert(labels.end(), 1000, 0);
  labels.insert(labels.end(), 10, 1);
  labels.push_back(2);
  const ClassIndex index(labels, 3);
  const std::size_t draws = 30000;
  const double p = 1.0 / 3.0;
  const double sd = std::sqrt(draws * p * (1 - p));

  CheckResult out;
  out.name = "class-balanced sampler frequencies";
  out.passed = true;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::array<std::size_t, 3> counts{};
    for (const auto& batch : class_balanced_sampler(index, draws / 100, 100, seed + s)) {
      for (std::size_t row : batch) {
        ++counts[static_cast<std::size_t>(index.class_of(row))];
      }
    }
    for (std::size_t k : counts) {
      const double z = std::abs(static_cast<double>(k) - draws * p) / sd;
      worst = std::max(worst, z);
      out.passed = out.passed && z < 4.0;
    }
  }
  std::ostringstream os;
  os << "10 seeds x 30000 draws, worst deviation " << worst << " sd";
  out.detail = os.str();
  return out;
}

CheckResult aar_check() {
  struct Row {
    double mae, sigma, aar;
  };
  const Row rows[] = {{1.71, 1.11, 7.18}, {1.89, 0.37, 7.74}, {1.86, 0.20, 7.94}};
  CheckResult out;
  out.name = "AAR arithmetic";
  out.passed = true;
  std::ostringstream os;
  const char* sep = "";
  for (const auto& r : rows) {
    const double got = aar(r.mae, r.sigma);
    const bool ok = std::llround(got * 100.0) == std::llround(r.aar * 100.0);
    out.passed = out.passed && ok;
    os << sep << "(" << r.mae << ", " << r.sigma << ") -> " << got << (ok ? "" : " MISMATCH");
    sep = "; ";
  }
  out.detail = os.str();
  return out;
}

} // namespace

bool SelfcheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

SelfcheckReport run_selfcheck(const SelfcheckOptions& options) {
  SelfcheckReport report;
  report.checks.push_back(gradient_check(options, LossMode::Representation));
  report.checks.push_back(gradient_check(options, LossMode::Classification));
  report.checks.push_back(sampler_check(options.seed));
  report.checks.push_back(aar_check());
  return report;
}

} // namespace lae
