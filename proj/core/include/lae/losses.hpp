#pragma once

#include <optional>
#include <span>
#include <vector>

namespace lae {

/// Soft target over ages 0..K-1: a discretised Gaussian centred on the true age.
struct LabelDistribution {
  std::vector<double> probs;
  int target_age = 0;

  std::size_t size() const noexcept { return probs.size(); }
};

/// Softmax output of the classifier together with the logits it came from.
struct PredictionDistribution {
  std::vector<double> logits;
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
};

struct LossWeights {
  /// Weight of the expectation-regression term in the representation loss.
  double lambda = 1.0;
  /// Validation MAE frozen after the representation stage. Required by the
  /// classification loss, ignored otherwise.
  std::optional<double> anchor_mae;
};

enum class LossMode { Representation, Classification };

/// Per-sample loss broken into its parts. `total` is what gets optimised.
struct LossTerms {
  double kl = 0.0;
  double er = 0.0;
  double total = 0.0;
};

/// Floor applied to predicted probabilities before taking their log.
inline constexpr double kProbabilityFloor = 1e-12;

/// Gaussian label distribution over K classes, renormalised to sum to one
/// after truncation to [0, K-1].
LabelDistribution gaussian_label_distribution(int age, double sigma_label, int num_classes);

/// Max-shifted softmax. Throws NumericError on a non-finite logit.
PredictionDistribution softmax(std::span<const double> logits);

/// Full KL divergence sum_k z_k ln(z_k / zhat_k) with 0 ln 0 = 0.
double kl_loss(std::span<const double> target, const PredictionDistribution& prediction);
double kl_loss(const LabelDistribution& target, const PredictionDistribution& prediction);

/// Expectation regression: sum_k k * zhat_k, where class k is age k.
double expected_age(const PredictionDistribution& prediction);

/// |y - expected_age(zhat)|
double er_loss(int age, const PredictionDistribution& prediction);

/// KL + lambda * |y - yhat|
double representation_loss(std::span<const double> target, int age,
                           const PredictionDistribution& prediction, const LossWeights& weights);

/// KL + (|y - yhat| - anchor_mae)^2. Throws ConfigError without an anchor.
double classification_loss(std::span<const double> target, int age,
                           const PredictionDistribution& prediction, const LossWeights& weights);

LossTerms loss_terms(LossMode mode, std::span<const double> target, int age,
                     const PredictionDistribution& prediction, const LossWeights& weights);

/// Analytic gradient of the selected loss with respect to the logits.
/// The l1 kink uses sign(0) = 0.
std::vector<double> loss_gradient_wrt_logits(LossMode mode, std::span<const double> target, int age,
                                             const PredictionDistribution& prediction,
                                             const LossWeights& weights);

/// Writes the gradient into `out` (size K) and returns the loss terms.
/// Allocation-free variant used by the training loop.
LossTerms loss_and_gradient(LossMode mode, std::span<const double> target, int age,
                            const PredictionDistribution& prediction, const LossWeights& weights,
                            std::span<double> out);

} // namespace lae
