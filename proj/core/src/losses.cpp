#include "lae/losses.hpp"

#include "lae/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lae {

namespace {

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DomainError("distribution length mismatch: " + std::to_string(a) + " vs " +
                      std::to_string(b));
  }
}

void check_age(int age, std::size_t num_classes) {
  if (age < 0 || static_cast<std::size_t>(age) >= num_classes) {
    throw DomainError("age " + std::to_string(age) + " outside [0, " +
                      std::to_string(num_classes - 1) + "]");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

const double& require_anchor(const LossWeights& weights) {
  if (!weights.anchor_mae) {
    throw ConfigError("classification loss requires anchor_mae from the representation stage");
  }
  return *weights.anchor_mae;
}

} // namespace

LabelDistribution gaussian_label_distribution(int age, double sigma_label, int num_classes) {
  if (num_classes < 1) {
    throw DomainError("class count must be positive");
  }
  check_age(age, static_cast<std::size_t>(num_classes));
  if (!(sigma_label > 0.0)) {
    throw DomainError("label sigma must be positive, got " + std::to_string(sigma_label));
  }

  LabelDistribution out;
  out.target_age = age;
  out.probs.resize(static_cast<std::size_t>(num_classes));
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sigma_label);
  double sum = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    const double d = static_cast<double>(k - age);
    const double p = norm * std::exp(-d * d / (2.0 * sigma_label * sigma_label));
    out.probs[static_cast<std::size_t>(k)] = p;
    sum += p;
  }
  for (double& p : out.probs) {
    p /= sum;
  }
  return out;
}

PredictionDistribution softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw DomainError("softmax of an empty logit vector");
  }
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) {
      throw NumericError("non-finite logit at class " + std::to_string(k));
    }
  }
  PredictionDistribution out;
  out.logits.assign(logits.begin(), logits.end());
  out.probs.resize(logits.size());
  const double shift = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.probs[k] = std::exp(logits[k] - shift);
    sum += out.probs[k];
  }
  for (double& p : out.probs) {
    p /= sum;
  }
  return out;
}

double kl_loss(std::span<const double> target, const PredictionDistribution& prediction) {
  check_same_length(target.size(), prediction.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double z = target[k];
    if (z > 0.0) {
      acc += z * (std::log(z) - std::log(std::max(prediction.probs[k], kProbabilityFloor)));
    }
  }
  return acc;
}

double kl_loss(const LabelDistribution& target, const PredictionDistribution& prediction) {
  return kl_loss(std::span<const double>(target.probs), prediction);
}

double expected_age(const PredictionDistribution& prediction) {
  double acc = 0.0;
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    acc += static_cast<double>(k) * prediction.probs[k];
  }
  return acc;
}

double er_loss(int age, const PredictionDistribution& prediction) {
  check_age(age, prediction.size());
  return std::abs(static_cast<double>(age) - expected_age(prediction));
}

double representation_loss(std::span<const double> target, int age,
                           const PredictionDistribution& prediction, const LossWeights& weights) {
  return loss_terms(LossMode::Representation, target, age, prediction, weights).total;
}

double classification_loss(std::span<const double> target, int age,
                           const PredictionDistribution& prediction, const LossWeights& weights) {
  return loss_terms(LossMode::Classification, target, age, prediction, weights).total;
}

LossTerms loss_terms(LossMode mode, std::span<const double> target, int age,
                     const PredictionDistribution& prediction, const LossWeights& weights) {
  LossTerms terms;
  terms.kl = kl_loss(target, prediction);
  terms.er = er_loss(age, prediction);
  if (mode == LossMode::Representation) {
    terms.total = terms.kl + weights.lambda * terms.er;
  } else {
    const double gap = terms.er - require_anchor(weights);
    terms.total = terms.kl + gap * gap;
  }
  return terms;
}

std::vector<double> loss_gradient_wrt_logits(LossMode mode, std::span<const double> target, int age,
                                             const PredictionDistribution& prediction,
                                             const LossWeights& weights) {
  std::vector<double> grad(prediction.size());
  loss_and_gradient(mode, target, age, prediction, weights, grad);
  return grad;
}

LossTerms loss_and_gradient(LossMode mode, std::span<const double> target, int age,
                            const PredictionDistribution& prediction, const LossWeights& weights,
                            std::span<double> out) {
  check_same_length(out.size(), prediction.size());
  const LossTerms terms = loss_terms(mode, target, age, prediction, weights);

  const double yhat = expected_age(prediction);
  const double residual = static_cast<double>(age) - yhat;
  // d|y - yhat| / d yhat
  const double der_dyhat = -sign(residual);
  double coeff = 0.0; // dL / d yhat through the regression term
  if (mode == LossMode::Representation) {
    coeff = weights.lambda * der_dyhat;
  } else {
    coeff = 2.0 * (terms.er - require_anchor(weights)) * der_dyhat;
  }

  for (std::size_t j = 0; j < out.size(); ++j) {
    const double p = prediction.probs[j];
    const double dyhat = p * (static_cast<double>(j) - yhat);
    out[j] = (p - target[j]) + coeff * dyhat;
  }
  return terms;
}

} // namespace lae
