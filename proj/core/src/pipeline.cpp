#include "lae/pipeline.hpp"

#include "lae/error.hpp"
#include "lae/optim.hpp"
#include "lae/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <array>
#include <functional>
#include <memory>
#include <ostream>
#include <random>

namespace lae {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kStage1SamplerStream = 12;
constexpr std::uint64_t kStage2SamplerStream = 13;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x4C414555u};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require_nonempty(const Dataset& train_set, const Dataset& val_set) {
  if (train_set.empty()) {
    throw DomainError("training split is empty");
  }
  if (val_set.empty()) {
    throw DomainError("validation split is empty");
  }
  if (train_set.dim() != val_set.dim()) {
    throw DomainError("training and validation feature widths differ");
  }
}

std::vector<LabelDistribution> label_table(const TrainConfig& config) {
  std::vector<LabelDistribution> table;
  table.reserve(static_cast<std::size_t>(config.num_classes));
  for (int k = 0; k < config.num_classes; ++k) {
    table.push_back(gaussian_label_distribution(k, config.sigma_label, config.num_classes));
  }
  return table;
}

/// Everything a training regime varies: loss, sampler and schedule.
struct StagePlan {
  std::string stage;
  LossMode mode = LossMode::Representation;
  LossWeights weights;
  LrSchedule schedule;
  std::size_t epochs = 0;
  std::size_t batches_per_epoch = 0;
  std::function<std::vector<IndexBatch>(std::size_t epoch)> batches;
  /// Called after every epoch; used by stage 2 for the drift check.
  std::function<void(const Network&, std::size_t epoch)> after_epoch;
};

std::function<std::vector<IndexBatch>(std::size_t)> make_sampler(SamplerKind kind, const TrainConfig& config,
                                                                  const Dataset& train_set, std::uint64_t stream) {
  const std::uint64_t seed = derive_seed(config.seed, stream);
  const std::size_t n = train_set.size();
  const std::size_t batch = config.batch_size;
  if (kind == SamplerKind::Instance) {
    return [=](std::size_t epoch) { return instance_sampler(n, batch, seed, epoch); };
  }
  auto index = std::make_shared<const ClassIndex>(train_set.ages(), config.num_classes);
  const std::size_t per_epoch = batches_per_epoch(n, batch);
  return [=](std::size_t epoch) {
    return class_balanced_sampler(*index, per_epoch, batch, derive_seed(seed, epoch + 1));
  };
}

std::vector<LossLogEntry> run_stage(Network& net, const TrainConfig& config, const Dataset& train_set,
                                    const StagePlan& plan) {
  if (train_set.dim() != net.input_dim()) {
    throw ConfigError("dataset has " + std::to_string(train_set.dim()) + " features, network expects " +
                      std::to_string(net.input_dim()));
  }
  for (int age : train_set.ages()) {
    if (age >= config.num_classes) {
      throw ConfigError("label " + std::to_string(age) + " does not fit K = " + std::to_string(config.num_classes));
    }
  }
  const auto labels = label_table(config);
  SgdState state = SgdState::for_network(net, config.momentum, config.weight_decay);

  std::vector<LossLogEntry> log;
  log.reserve(plan.epochs * plan.batches_per_epoch);
  Matrix batch_x;
  Matrix grad_logits;
  ForwardCache cache;
  std::vector<double> row(static_cast<std::size_t>(config.num_classes));
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    const auto batches = plan.batches(epoch);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& rows = batches[b];
      train_set.gather(rows, batch_x);
      const Matrix logits = forward(net, batch_x, &cache);
      grad_logits.resize(logits.rows(), logits.cols());

      LossTerms mean;
      try {
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
          std::copy(logits.row(r).data(), logits.row(r).data() + logits.cols(), row.begin());
          const int age = train_set.ages()[rows[static_cast<std::size_t>(r)]];
          const auto pred = softmax(row);
          const auto terms = loss_and_gradient(plan.mode, labels[static_cast<std::size_t>(age)].probs, age, pred,
                                               plan.weights, {grad_logits.row(r).data(), row.size()});
          mean.kl += terms.kl;
          mean.er += terms.er;
          mean.total += terms.total;
        }
      } catch (const NumericError& e) {
        throw DivergenceError(plan.stage + ": " + e.what() + " at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(b));
      }
      const double inv = 1.0 / static_cast<double>(logits.rows());
      mean.kl *= inv;
      mean.er *= inv;
      mean.total *= inv;
      if (!std::isfinite(mean.total) || mean.total > kDivergenceLoss) {
        throw DivergenceError(plan.stage + ": loss " + format_double(mean.total) + " at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(b));
      }

      const double lr = lr_at(plan.schedule, step);
      const GradientBuffer grads = backward(net, cache, grad_logits);
      sgd_step(net, grads, state, lr);
      log.push_back({plan.stage, epoch, step, lr, mean.total, mean.kl, mean.er});
      ++step;
    }
    if (plan.after_epoch) {
      plan.after_epoch(net, epoch);
    }
  }
  return log;
}

LrSchedule one_cycle_for(const TrainConfig& config, double base_lr, std::size_t total_steps) {
  LrSchedule s = LrSchedule::one_cycle(scaled_base_lr(base_lr, config.batch_size), total_steps);
  s.warmup_fraction = config.onecycle_warmup_fraction;
  s.div_factor = config.onecycle_div_factor;
  s.final_div_factor = config.onecycle_final_div_factor;
  return s;
}

bool extractor_equal(const Network& a, const Network& b) {
  const auto ea = a.extractor();
  const auto eb = b.extractor();
  if (ea.size() != eb.size()) {
    return false;
  }
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (ea[i].weights != eb[i].weights || ea[i].bias != eb[i].bias) {
      return false;
    }
  }
  return true;
}

} // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (num_classes < 2) fail("K must be >= 2");
  if (!(sigma_label > 0.0)) fail("sigma_label must be positive");
  if (!(lambda >= 0.0)) fail("lambda must be non-negative");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(base_lr_stage1 > 0.0)) fail("base_lr_stage1 must be positive");
  if (!(base_lr_stage2 > 0.0)) fail("base_lr_stage2 must be positive");
  if (epochs_stage1 < 1) fail("epochs_stage1 must be >= 1");
  if (epochs_stage2 < 1) fail("epochs_stage2 must be >= 1");
  if (baseline_epochs < 1) fail("baseline_epochs must be >= 1");
  if (!(baseline_gamma > 0.0)) fail("baseline_gamma must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(onecycle_warmup_fraction > 0.0 && onecycle_warmup_fraction < 1.0))
    fail("onecycle_warmup must lie in (0, 1)");
  if (!(onecycle_div_factor > 0.0)) fail("onecycle_div_factor must be positive");
  if (!(onecycle_final_div_factor > 0.0)) fail("onecycle_final_div_factor must be positive");
  for (std::size_t h : hidden) {
    if (h < 1) fail("hidden widths must be >= 1");
  }
}

std::vector<std::size_t> TrainConfig::arch(std::size_t input_dim) const {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(static_cast<std::size_t>(num_classes));
  return dims;
}

RunArtifacts train_standard_baseline(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set) {
  config.validate();
  require_nonempty(train_set, val_set);
  Network net = init_network(config.arch(train_set.dim()), derive_seed(config.seed, kInitStream));

  StagePlan plan;
  plan.stage = "baseline";
  plan.mode = LossMode::Representation;
  plan.weights.lambda = config.lambda;
  plan.epochs = config.baseline_epochs;
  plan.batches_per_epoch = batches_per_epoch(train_set.size(), config.batch_size);
  std::vector<std::size_t> milestones;
  for (std::size_t e : config.baseline_milestones) {
    milestones.push_back(e * plan.batches_per_epoch);
  }
  plan.schedule = LrSchedule::step_decay(scaled_base_lr(config.base_lr_stage1, config.batch_size),
                                         plan.epochs * plan.batches_per_epoch, milestones, config.baseline_gamma);
  plan.batches = make_sampler(config.sampler_stage1, config, train_set, kStage1SamplerStream);

  RunArtifacts out;
  out.label = "Baseline-S";
  out.loss_log = run_stage(net, config, train_set, plan);
  out.report = evaluate(net, val_set, config.num_classes);
  out.checkpoint.network = std::move(net);
  return out;
}

RunArtifacts train_stage1(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set) {
  config.validate();
  require_nonempty(train_set, val_set);
  Network net = init_network(config.arch(train_set.dim()), derive_seed(config.seed, kInitStream));

  StagePlan plan;
  plan.stage = "stage1";
  plan.mode = LossMode::Representation;
  plan.weights.lambda = config.lambda;
  plan.epochs = config.epochs_stage1;
  plan.batches_per_epoch = batches_per_epoch(train_set.size(), config.batch_size);
  plan.schedule = one_cycle_for(config, config.base_lr_stage1, plan.epochs * plan.batches_per_epoch);
  plan.batches = make_sampler(config.sampler_stage1, config, train_set, kStage1SamplerStream);

  RunArtifacts out;
  out.label = "Representation";
  out.loss_log = run_stage(net, config, train_set, plan);
  out.report = evaluate(net, val_set, config.num_classes);
  out.checkpoint.network = std::move(net);
  out.checkpoint.anchor_mae = out.report.mae_overall;
  return out;
}

RunArtifacts train_stage2(const TrainConfig& config, const RunArtifacts& stage1, const Dataset& train_set,
                          const Dataset& val_set) {
  config.validate();
  require_nonempty(train_set, val_set);
  if (!stage1.checkpoint.anchor_mae) {
    throw ConfigError("stage-1 checkpoint carries no anchor_mae");
  }
  const Network& reference = stage1.checkpoint.network;
  Network net = reference;
  net.set_freeze_extractor(true);

  StagePlan plan;
  plan.stage = "stage2";
  plan.mode = LossMode::Classification;
  plan.weights.lambda = config.lambda;
  plan.weights.anchor_mae = *stage1.checkpoint.anchor_mae;
  plan.epochs = config.epochs_stage2;
  plan.batches_per_epoch = batches_per_epoch(train_set.size(), config.batch_size);
  plan.schedule = one_cycle_for(config, config.base_lr_stage2, plan.epochs * plan.batches_per_epoch);
  plan.batches = make_sampler(config.sampler_stage2, config, train_set, kStage2SamplerStream);
  plan.after_epoch = [&reference](const Network& current, std::size_t epoch) {
    if (!extractor_equal(current, reference)) {
      throw InvariantError("extractor parameters changed during stage 2 (epoch " + std::to_string(epoch) + ")");
    }
  };

  RunArtifacts out;
  out.label = "Classification";
  out.loss_log = run_stage(net, config, train_set, plan);
  out.report = evaluate(net, val_set, config.num_classes);
  out.checkpoint.network = std::move(net);
  out.checkpoint.anchor_mae = stage1.checkpoint.anchor_mae;
  return out;
}

LaeRun train_lae(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set) {
  LaeRun run;
  run.stage1 = train_stage1(config, train_set, val_set);
  run.stage2 = train_stage2(config, run.stage1, train_set, val_set);
  return run;
}

MetricsReport evaluate(const Network& net, const Dataset& data, int expected_classes) {
  if (net.num_classes() != static_cast<std::size_t>(expected_classes)) {
    throw ConfigError("model has K = " + std::to_string(net.num_classes()) + ", expected " +
                      std::to_string(expected_classes));
  }
  if (data.dim() != net.input_dim()) {
    throw ConfigError("dataset has " + std::to_string(data.dim()) + " features, model expects " +
                      std::to_string(net.input_dim()));
  }
  if (data.empty()) {
    throw DomainError("cannot evaluate on an empty dataset");
  }
  const auto predictions = predict_age(net, data.features());
  return compute_report(predictions, data.ages());
}

void write_loss_log(std::ostream& out, const std::vector<LossLogEntry>& log) {
  out << "stage,epoch,step,lr,loss,kl,er\n";
  for (const auto& e : log) {
    out << e.stage << ',' << e.epoch << ',' << e.step << ',' << format_double(e.lr) << ','
        << format_double(e.loss) << ',' << format_double(e.kl) << ',' << format_double(e.er) << '\n';
  }
}

} // namespace lae
