#include "lae/checkpoint.hpp"
#include "lae/config.hpp"
#include "lae/error.hpp"
#include "lae/metrics.hpp"
#include "lae/pipeline.hpp"
#include "lae/selfcheck.hpp"
#include "lae/synthdata.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIo = 3,
  kDivergence = 4,
  kSelfcheckFailed = 5,
};

lae::ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? lae::ExperimentConfig{} : lae::load_config(path);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw lae::IoError("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) {
    throw lae::IoError("failed writing '" + path.string() + "'");
  }
}

struct GenDataArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_gen_data(const GenDataArgs& args) {
  auto cfg = config_or_default(args.config);
  if (auto s = lae::seed_override(args.seed)) {
    cfg.data.seed = *s;
  }
  const auto data = lae::generate(cfg.data);
  lae::save_dataset(args.out, data);

  std::array<std::size_t, 11> decades{};
  for (int age : data.ages()) {
    ++decades[static_cast<std::size_t>(age / 10)];
  }
  std::cout << "wrote " << data.size() << " samples (d_in=" << data.dim() << ") to " << args.out << '\n';
  for (std::size_t d = 0; d < decades.size(); ++d) {
    const int lo = static_cast<int>(d) * 10;
    const int hi = d + 1 == decades.size() ? lae::kMaxAge : lo + 9;
    std::cout << "  ages " << lo << '-' << hi << ": " << decades[d] << '\n';
  }
  std::cout << "imbalance factor: " << lae::imbalance_factor(data.ages()) << '\n';
  return kOk;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string mode;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void write_log_file(const fs::path& path, const std::vector<lae::LossLogEntry>& log) {
  auto out = open_output(path);
  lae::write_loss_log(out, log);
  close_output(out, path);
}

int run_train(const TrainArgs& args) {
  auto cfg = config_or_default(args.config);
  if (auto s = lae::seed_override(args.seed)) {
    cfg.train.seed = *s;
  }
  cfg.train.validate();

  const auto data = lae::load_dataset(args.data);
  const auto [train_set, val_set] = lae::split(data, cfg.train_ratio, cfg.train.seed);

  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw lae::IoError("cannot create '" + dir.string() + "': " + ec.message());
  }

  std::vector<lae::LabeledReport> rows;
  std::vector<lae::LossLogEntry> log;
  if (args.mode == "baseline") {
    auto run = lae::train_standard_baseline(cfg.train, train_set, val_set);
    lae::save_checkpoint(dir / "baseline.ckpt", run.checkpoint);
    rows.push_back({run.label, run.report});
    log = std::move(run.loss_log);
  } else if (args.mode == "stage1") {
    auto run = lae::train_stage1(cfg.train, train_set, val_set);
    lae::save_checkpoint(dir / "stage1.ckpt", run.checkpoint);
    rows.push_back({run.label, run.report});
    log = std::move(run.loss_log);
  } else {
    auto run = lae::train_lae(cfg.train, train_set, val_set);
    lae::save_checkpoint(dir / "stage1.ckpt", run.stage1.checkpoint);
    lae::save_checkpoint(dir / "stage2.ckpt", run.stage2.checkpoint);
    rows.push_back({run.stage1.label, run.stage1.report});
    rows.push_back({run.stage2.label, run.stage2.report});
    log = std::move(run.stage1.loss_log);
    log.insert(log.end(), run.stage2.loss_log.begin(), run.stage2.loss_log.end());
  }
  write_log_file(dir / "loss_log.csv", log);

  const auto report_path = dir / "report.txt";
  auto report = open_output(report_path);
  lae::write_labeled_reports(report, rows, cfg.table_precision);
  close_output(report, report_path);

  lae::write_report_table(std::cout, rows, cfg.table_precision);
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string report;
  std::string config;
};

int run_eval(const EvalArgs& args) {
  const auto cfg = config_or_default(args.config);
  const auto checkpoint = lae::load_checkpoint(args.model);
  const auto data = lae::load_dataset(args.data);
  const auto report = lae::evaluate(checkpoint.network, data, cfg.train.num_classes);

  const fs::path path(args.report);
  auto out = open_output(path);
  lae::write_report_kv(out, report);
  close_output(out, path);

  const std::vector<lae::LabeledReport> rows{{fs::path(args.model).stem().string(), report}};
  lae::write_report_table(std::cout, rows, cfg.table_precision);
  return kOk;
}

int run_selfcheck(std::size_t cases) {
  lae::SelfcheckOptions opts;
  opts.gradient_cases = cases;
  const auto report = lae::run_selfcheck(opts);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) {
      std::cout << "  (" << c.detail << ')';
    }
    std::cout << '\n';
  }
  if (!report.passed()) {
    std::cerr << "selfcheck failed:";
    for (const auto& c : report.checks) {
      if (!c.passed) {
        std::cerr << ' ' << c.name;
      }
    }
    std::cerr << '\n';
    return kSelfcheckFailed;
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-tailed age estimation on synthetic data"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic long-tailed dataset");
  gen_cmd->add_option("--config", gen.config, "Experiment config (INI)")->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
  gen_cmd->add_option("--seed", gen.seed, "Override [data] seed");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train baseline, stage 1, or both LAE stages");
  train_cmd->add_option("--config", train.config, "Experiment config (INI)")->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train.data, "Dataset CSV")->required();
  train_cmd->add_option("--mode", train.mode, "baseline | stage1 | lae")
      ->required()
      ->check(CLI::IsMember({"baseline", "stage1", "lae"}));
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--seed", train.seed, "Override [train] seed");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--model", eval.model, "Checkpoint path")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset CSV")->required();
  eval_cmd->add_option("--report", eval.report, "Report output path")->required();
  eval_cmd->add_option("--config", eval.config, "Config supplying K and table precision")
      ->check(CLI::ExistingFile);

  std::size_t selfcheck_cases = lae::SelfcheckOptions{}.gradient_cases;
  auto* selfcheck_cmd = app.add_subcommand("selfcheck", "Gradient, sampler and AAR self-tests");
  selfcheck_cmd->add_option("--cases", selfcheck_cases, "Finite-difference instances")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen_cmd) {
      return run_gen_data(gen);
    }
    if (*train_cmd) {
      return run_train(train);
    }
    if (*eval_cmd) {
      return run_eval(eval);
    }
    return run_selfcheck(selfcheck_cases);
  } catch (const lae::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const lae::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kConfig;
  } catch (const lae::IoError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kIo;
  } catch (const lae::FormatError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kIo;
  } catch (const lae::ParseError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kIo;
  } catch (const lae::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const lae::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
