#pragma once

#include "lae/model.hpp"

#include <cstddef>
#include <vector>

namespace lae {

/// Linear learning-rate scaling against a reference batch of 256.
double scaled_base_lr(double base, std::size_t batch_size);

enum class ScheduleKind { Constant, StepDecay, OneCycle };

struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double base_lr = 0.0;
  std::size_t total_steps = 1;

  // step decay: lr is multiplied by `gamma` once per milestone reached.
  std::vector<std::size_t> milestone_steps;
  double gamma = 0.1;

  // one-cycle: cosine rise from base/div_factor to base over the first
  // warmup_fraction of the run, then cosine fall to
  // base/(div_factor * final_div_factor) at the last step.
  double warmup_fraction = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  static LrSchedule constant(double base_lr, std::size_t total_steps);
  static LrSchedule step_decay(double base_lr, std::size_t total_steps,
                               std::vector<std::size_t> milestone_steps, double gamma);
  static LrSchedule one_cycle(double base_lr, std::size_t total_steps);

  /// Step index at which a one-cycle curve peaks: round(warmup_fraction * (total_steps - 1)).
  std::size_t peak_step() const;
};

/// Learning rate for a 0-based step. Throws UsageError outside [0, total_steps).
double lr_at(const LrSchedule& schedule, std::size_t step);

struct SgdState {
  std::vector<LayerGradient> momentum_buffers;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t step_count = 0;

  /// Zeroed buffers shaped like `net`.
  static SgdState for_network(const Network& net, double momentum = 0.9, double weight_decay = 5e-4);
};

/// Classic coupled SGD:
///   buf <- momentum * buf + grad + weight_decay * param
///   param <- param - lr * buf
/// Layers frozen in `net` are skipped entirely, including weight decay.
void sgd_step(Network& net, const GradientBuffer& grads, SgdState& state, double lr);

} // namespace lae
