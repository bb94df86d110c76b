#pragma once

#include "lae/pipeline.hpp"
#include "lae/synthdata.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace lae {

/// Everything an experiment needs, read from an INI-style document:
///
///   [data]     d_in, n_total, age_profile, custom_weights, noise_std, seed, train_ratio
///   [model]    K, sigma_label, hidden
///   [train]    lambda, batch_size, base_lr_stage1, base_lr_stage2,
///              epochs_stage1, epochs_stage2, baseline_epochs,
///              baseline_milestones, baseline_gamma, weight_decay,
///              momentum, onecycle_warmup, onecycle_div_factor,
///              onecycle_final_div_factor, sampler_stage1, sampler_stage2, seed
///   [metrics]  table_precision
///
/// Lists are comma-separated. Unknown sections or keys are rejected.
struct ExperimentConfig {
  GenSpec data;
  double train_ratio = 0.8;
  TrainConfig train;
  int table_precision = 2;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seed precedence: explicit flag, then LAE_SEED, then the file.
/// Returns the override to apply, if any. Throws ConfigError when LAE_SEED
/// is set but not an unsigned integer.
std::optional<std::uint64_t> seed_override(std::optional<std::uint64_t> flag_seed);

} // namespace lae
