#include "lae/config.hpp"

#include "lae/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace lae {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Typed access to one section; records which keys were consumed.
class Section {
public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  template <typename T, typename Parse>
  void read(const std::string& key, T& target, const char* expected, Parse parse) {
    consumed_.insert(key);
    if (!tree_) {
      return;
    }
    auto child = tree_->get_child_optional(key);
    if (!child) {
      return;
    }
    const std::string raw = trim(child->data());
    try {
      target = parse(raw);
    } catch (const ConfigError&) {
      throw ConfigError("[" + name_ + "] " + key + ": expected " + expected + ", got '" + raw + "'");
    }
  }

  void read_u64(const std::string& key, std::uint64_t& target) {
    read(key, target, "an unsigned integer", parse_u64);
  }
  void read_size(const std::string& key, std::size_t& target) {
    read(key, target, "an unsigned integer", [](const std::string& s) { return std::size_t(parse_u64(s)); });
  }
  void read_int(const std::string& key, int& target) {
    read(key, target, "an integer", [](const std::string& s) {
      int v = 0;
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw ConfigError(s);
      }
      return v;
    });
  }
  void read_double(const std::string& key, double& target) {
    read(key, target, "a number", parse_double);
  }
  void read_size_list(const std::string& key, std::vector<std::size_t>& target) {
    read(key, target, "a comma-separated list of unsigned integers", [](const std::string& s) {
      std::vector<std::size_t> out;
      for (const auto& item : split_list(s)) {
        out.push_back(static_cast<std::size_t>(parse_u64(item)));
      }
      return out;
    });
  }
  void read_double_list(const std::string& key, std::vector<double>& target) {
    read(key, target, "a comma-separated list of numbers", [](const std::string& s) {
      std::vector<double> out;
      for (const auto& item : split_list(s)) {
        out.push_back(parse_double(item));
      }
      return out;
    });
  }

  /// Throws on any key in the section that no read() asked for.
  void reject_unknown() const {
    if (!tree_) {
      return;
    }
    for (const auto& [key, value] : *tree_) {
      if (!consumed_.count(key)) {
        throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
      }
    }
  }

  static std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw ConfigError(s);
    }
    return v;
  }

  static double parse_double(const std::string& s) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw ConfigError(s);
    }
    return v;
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) {
      return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(trim(item));
    }
    return out;
  }

private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> consumed_;
};

SamplerKind parse_sampler(const std::string& s) {
  if (s == "instance") return SamplerKind::Instance;
  if (s == "class_balanced") return SamplerKind::ClassBalanced;
  throw ConfigError(s);
}

AgeProfile parse_profile(const std::string& s) {
  if (s == "lognormal_mivia_like") return AgeProfile::LognormalMiviaLike;
  if (s == "uniform") return AgeProfile::Uniform;
  if (s == "custom") return AgeProfile::Custom;
  throw ConfigError(s);
}

} // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  const std::set<std::string> known = {"data", "model", "train", "metrics"};
  for (const auto& [name, section] : tree) {
    if (!known.count(name)) {
      throw ConfigError(section.empty() ? "key '" + name + "' outside any section"
                                        : "unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(name);
    return Section(name, child ? &*child : nullptr);
  };

  ExperimentConfig cfg;

  Section data = section("data");
  data.read_size("d_in", cfg.data.d_in);
  data.read_size("n_total", cfg.data.n_total);
  data.read("age_profile", cfg.data.profile, "one of lognormal_mivia_like|uniform|custom", parse_profile);
  data.read_double_list("custom_weights", cfg.data.custom_weights);
  data.read_double("noise_std", cfg.data.noise_std);
  data.read_u64("seed", cfg.data.seed);
  data.read_double("train_ratio", cfg.train_ratio);
  data.reject_unknown();

  Section model = section("model");
  model.read_int("K", cfg.train.num_classes);
  model.read_double("sigma_label", cfg.train.sigma_label);
  model.read_size_list("hidden", cfg.train.hidden);
  model.reject_unknown();

  Section train = section("train");
  auto& t = cfg.train;
  train.read_double("lambda", t.lambda);
  train.read_size("batch_size", t.batch_size);
  train.read_double("base_lr_stage1", t.base_lr_stage1);
  train.read_double("base_lr_stage2", t.base_lr_stage2);
  train.read_size("epochs_stage1", t.epochs_stage1);
  train.read_size("epochs_stage2", t.epochs_stage2);
  train.read_size("baseline_epochs", t.baseline_epochs);
  train.read_size_list("baseline_milestones", t.baseline_milestones);
  train.read_double("baseline_gamma", t.baseline_gamma);
  train.read_double("weight_decay", t.weight_decay);
  train.read_double("momentum", t.momentum);
  train.read_double("onecycle_warmup", t.onecycle_warmup_fraction);
  train.read_double("onecycle_div_factor", t.onecycle_div_factor);
  train.read_double("onecycle_final_div_factor", t.onecycle_final_div_factor);
  train.read("sampler_stage1", t.sampler_stage1, "one of instance|class_balanced", parse_sampler);
  train.read("sampler_stage2", t.sampler_stage2, "one of instance|class_balanced", parse_sampler);
  train.read_u64("seed", t.seed);
  train.reject_unknown();

  Section metrics = section("metrics");
  metrics.read_int("table_precision", cfg.table_precision);
  metrics.reject_unknown();

  if (cfg.data.d_in < 1) throw ConfigError("[data] d_in: must be >= 1");
  if (cfg.data.n_total < 1) throw ConfigError("[data] n_total: must be >= 1");
  if (!(cfg.data.noise_std >= 0.0)) throw ConfigError("[data] noise_std: must be non-negative");
  if (!(cfg.train_ratio > 0.0 && cfg.train_ratio < 1.0)) throw ConfigError("[data] train_ratio: must lie in (0, 1)");
  if (cfg.data.profile == AgeProfile::Custom && cfg.data.custom_weights.size() != static_cast<std::size_t>(kNumAges))
    throw ConfigError("[data] custom_weights: expected 101 weights for age_profile = custom");
  if (cfg.table_precision < 0 || cfg.table_precision > 12)
    throw ConfigError("[metrics] table_precision: must lie in [0, 12]");
  cfg.train.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  return parse_config(in);
}

std::optional<std::uint64_t> seed_override(std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) {
    return flag_seed;
  }
  if (const char* env = std::getenv("LAE_SEED"); env && *env) {
    const std::string s = trim(env);
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw ConfigError("LAE_SEED: expected an unsigned integer, got '" + s + "'");
    }
    return v;
  }
  return std::nullopt;
}

} // namespace lae
