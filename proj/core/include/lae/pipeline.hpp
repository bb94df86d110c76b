#pragma once

#include "lae/checkpoint.hpp"
#include "lae/losses.hpp"
#include "lae/metrics.hpp"
#include "lae/synthdata.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lae {

enum class SamplerKind { Instance, ClassBalanced };

struct TrainConfig {
  int num_classes = 101;
  double sigma_label = 1.0;
  double lambda = 1.0;
  /// Extractor widths between the input and the classifier.
  std::vector<std::size_t> hidden = {64, 32};
  std::size_t batch_size = 256;

  double base_lr_stage1 = 0.005;
  double base_lr_stage2 = 0.001;
  std::size_t epochs_stage1 = 24;
  std::size_t epochs_stage2 = 8;

  std::size_t baseline_epochs = 75;
  std::vector<std::size_t> baseline_milestones = {20, 40, 60};
  double baseline_gamma = 0.1;

  double weight_decay = 5e-4;
  double momentum = 0.9;

  double onecycle_warmup_fraction = 0.3;
  double onecycle_div_factor = 25.0;
  double onecycle_final_div_factor = 1e4;

  SamplerKind sampler_stage1 = SamplerKind::Instance;
  SamplerKind sampler_stage2 = SamplerKind::ClassBalanced;

  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  std::vector<std::size_t> arch(std::size_t input_dim) const;
};

struct LossLogEntry {
  std::string stage;
  std::size_t epoch = 0;
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double kl = 0.0;
  double er = 0.0;
};

/// Output of one training regime.
struct RunArtifacts {
  std::string label;
  /// Trained network. For the representation stage it carries anchor_mae,
  /// the validation MAE that the classification stage targets.
  Checkpoint checkpoint;
  std::vector<LossLogEntry> loss_log;
  MetricsReport report;
};

/// Instance-sampled training of the whole network with the representation
/// loss under a step-decay schedule.
RunArtifacts train_standard_baseline(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set);

/// Representation stage: instance sampling, representation loss, one-cycle.
/// Records the validation MAE as anchor_mae.
RunArtifacts train_stage1(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set);

/// Classification stage: extractor frozen, classifier retrained with the
/// classification loss under class-balanced sampling and one-cycle.
RunArtifacts train_stage2(const TrainConfig& config, const RunArtifacts& stage1, const Dataset& train_set,
                          const Dataset& val_set);

struct LaeRun {
  RunArtifacts stage1;
  RunArtifacts stage2;
};

LaeRun train_lae(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set);

/// Runs predict_age over the dataset and computes every metric.
/// Throws ConfigError if the network's class count differs from
/// `expected_classes` or its input width differs from the dataset's.
MetricsReport evaluate(const Network& net, const Dataset& data, int expected_classes = kNumAges);

/// CSV with header `stage,epoch,step,lr,loss,kl,er`, one line per step.
void write_loss_log(std::ostream& out, const std::vector<LossLogEntry>& log);

/// Threshold above which a batch loss counts as divergence.
inline constexpr double kDivergenceLoss = 1e6;

} // namespace lae
