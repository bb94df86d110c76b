#include "lae/optim.hpp"

#include "lae/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lae {

namespace {

constexpr double kReferenceBatch = 256.0;

/// Cosine interpolation from `start` (progress 0) to `end` (progress 1).
double cosine_anneal(double start, double end, double progress) {
  return end + (start - end) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

} // namespace

double scaled_base_lr(double base, std::size_t batch_size) {
  if (batch_size < 1) {
    throw DomainError("batch size must be >= 1");
  }
  if (!(base > 0.0)) {
    throw DomainError("base learning rate must be positive");
  }
  return base * static_cast<double>(batch_size) / kReferenceBatch;
}

LrSchedule LrSchedule::constant(double base_lr, std::size_t total_steps) {
  LrSchedule s;
  s.kind = ScheduleKind::Constant;
  s.base_lr = base_lr;
  s.total_steps = total_steps;
  return s;
}

LrSchedule LrSchedule::step_decay(double base_lr, std::size_t total_steps,
                                  std::vector<std::size_t> milestone_steps, double gamma) {
  LrSchedule s;
  s.kind = ScheduleKind::StepDecay;
  s.base_lr = base_lr;
  s.total_steps = total_steps;
  std::sort(milestone_steps.begin(), milestone_steps.end());
  s.milestone_steps = std::move(milestone_steps);
  s.gamma = gamma;
  return s;
}

LrSchedule LrSchedule::one_cycle(double base_lr, std::size_t total_steps) {
  LrSchedule s;
  s.kind = ScheduleKind::OneCycle;
  s.base_lr = base_lr;
  s.total_steps = total_steps;
  return s;
}

std::size_t LrSchedule::peak_step() const {
  if (total_steps < 2) {
    return 0;
  }
  return static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(total_steps - 1)));
}

double lr_at(const LrSchedule& schedule, std::size_t step) {
  if (step >= schedule.total_steps) {
    throw UsageError("step " + std::to_string(step) + " outside schedule of " +
                     std::to_string(schedule.total_steps) + " steps");
  }
  switch (schedule.kind) {
  case ScheduleKind::Constant:
    return schedule.base_lr;
  case ScheduleKind::StepDecay: {
    const auto passed = std::upper_bound(schedule.milestone_steps.begin(), schedule.milestone_steps.end(), step) -
                        schedule.milestone_steps.begin();
    return schedule.base_lr * std::pow(schedule.gamma, static_cast<double>(passed));
  }
  case ScheduleKind::OneCycle: {
    if (schedule.total_steps == 1) {
      return schedule.base_lr;
    }
    const double initial = schedule.base_lr / schedule.div_factor;
    const double final_lr = initial / schedule.final_div_factor;
    const std::size_t peak = schedule.peak_step();
    const std::size_t last = schedule.total_steps - 1;
    if (step <= peak && peak > 0) {
      return cosine_anneal(initial, schedule.base_lr,
                           static_cast<double>(step) / static_cast<double>(peak));
    }
    if (peak == last) {
      return schedule.base_lr;
    }
    return cosine_anneal(schedule.base_lr, final_lr,
                         static_cast<double>(step - peak) / static_cast<double>(last - peak));
  }
  }
  throw UsageError("unknown schedule kind");
}

SgdState SgdState::for_network(const Network& net, double momentum, double weight_decay) {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ConfigError("weight decay must be non-negative");
  }
  SgdState state;
  state.momentum_buffers = net.zero_gradients().layers;
  state.momentum = momentum;
  state.weight_decay = weight_decay;
  return state;
}

void sgd_step(Network& net, const GradientBuffer& grads, SgdState& state, double lr) {
  const std::size_t n = net.layers().size();
  if (grads.layers.size() != n || state.momentum_buffers.size() != n) {
    throw UsageError("gradient/optimizer state does not match network layer count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = net.layers()[i];
    const auto& g = grads.layers[i];
    auto& buf = state.momentum_buffers[i];
    if (g.weights.rows() != layer.weights.rows() || g.weights.cols() != layer.weights.cols() ||
        g.bias.size() != layer.bias.size() || buf.weights.rows() != layer.weights.rows() ||
        buf.weights.cols() != layer.weights.cols() || buf.bias.size() != layer.bias.size()) {
      throw UsageError("shape mismatch in layer " + std::to_string(i));
    }
    if (net.is_frozen(i)) {
      continue;
    }
    buf.weights = state.momentum * buf.weights + g.weights + state.weight_decay * layer.weights;
    buf.bias = state.momentum * buf.bias + g.bias + state.weight_decay * layer.bias;
    auto& mut = net.mutable_layer(i);
    mut.weights -= lr * buf.weights;
    mut.bias -= lr * buf.bias;
  }
  ++state.step_count;
}

} // namespace lae
