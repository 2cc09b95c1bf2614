#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qamro/csv.hpp"
#include "qamro/data.hpp"
#include "qamro/experiments.hpp"
#include "qamro/gradcheck.hpp"
#include "qamro/log.hpp"
#include "qamro/metrics.hpp"
#include "qamro/regressor.hpp"
#include "qamro/trainer.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  qamro::LossConfig loss;
  int batch_size = 256;
  double learning_rate = 0.0005;
  int patience = 20;
  int max_epochs = 500;
  double momentum = 0.0;
  std::string ranking = "qamro";  // qamro | mr | none
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  bool by_system = false;
  std::vector<int> hidden_dims = {128, 64};
};

void add_loss_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--alpha", o.loss.alpha, "adaptive margin scale")
      ->capture_default_str();
  cmd->add_option("--beta", o.loss.beta, "quality preference factor (>= 1)")
      ->capture_default_str();
  cmd->add_option("--fixed-margin", o.loss.fixed_margin,
                  "margin of the plain ranking loss")
      ->capture_default_str();
  cmd->add_option("--huber-delta", o.loss.huber_delta, "Huber crossover")
      ->capture_default_str();
  cmd->add_option("--lambda-rank", o.loss.lambda_rank,
                  "weight of the ranking term")
      ->capture_default_str();
  cmd->add_option("--scale-min", o.loss.scale_min, "rating scale lower bound")
      ->capture_default_str();
  cmd->add_option("--scale-max", o.loss.scale_max, "rating scale upper bound")
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, CommonOpts& o) {
  add_loss_flags(cmd, o);
  cmd->add_option("--batch-size", o.batch_size, "mini-batch size")
      ->capture_default_str();
  cmd->add_option("--lr", o.learning_rate, "SGD step size")
      ->capture_default_str();
  cmd->add_option("--patience", o.patience,
                  "epochs without validation improvement before stopping")
      ->capture_default_str();
  cmd->add_option("--max-epochs", o.max_epochs, "hard epoch cap")
      ->capture_default_str();
  cmd->add_option("--momentum", o.momentum, "SGD momentum (0 = plain SGD)")
      ->capture_default_str();
  cmd->add_option("--ranking-loss", o.ranking,
                  "ranking term: qamro, mr, or none")
      ->check(CLI::IsMember({"qamro", "mr", "none"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "run seed")->capture_default_str();
  cmd->add_option("--val-fraction", o.val_fraction, "validation share")
      ->capture_default_str();
  cmd->add_flag("--by-system-split", o.by_system,
                "hold out whole systems for validation");
  cmd->add_option("--hidden-dims", o.hidden_dims, "two hidden layer sizes")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
}

qamro::RunConfig to_run_config(const CommonOpts& o) {
  qamro::RunConfig rc;
  rc.train.batch_size = o.batch_size;
  rc.train.learning_rate = o.learning_rate;
  rc.train.patience = o.patience;
  rc.train.max_epochs = o.max_epochs;
  rc.train.momentum = o.momentum;
  rc.train.loss = o.loss;
  if (o.ranking == "qamro")
    rc.train.objective = qamro::RankingObjective::kAdaptive;
  else if (o.ranking == "mr")
    rc.train.objective = qamro::RankingObjective::kFixedMargin;
  else
    rc.train.objective = qamro::RankingObjective::kNone;
  rc.val_fraction = o.val_fraction;
  rc.by_system_split = o.by_system;
  rc.hidden_dims = o.hidden_dims;
  return rc;
}

ordered_json loss_to_json(const qamro::LossConfig& l) {
  ordered_json j;
  j["alpha"] = l.alpha;
  j["beta"] = l.beta;
  j["fixed_margin"] = l.fixed_margin;
  j["huber_delta"] = l.huber_delta;
  j["lambda_rank"] = l.lambda_rank;
  j["scale_min"] = l.scale_min;
  j["scale_max"] = l.scale_max;
  return j;
}

ordered_json common_to_json(const CommonOpts& o) {
  ordered_json j;
  j["loss"] = loss_to_json(o.loss);
  j["batch_size"] = o.batch_size;
  j["lr"] = o.learning_rate;
  j["patience"] = o.patience;
  j["max_epochs"] = o.max_epochs;
  j["momentum"] = o.momentum;
  j["ranking_loss"] = o.ranking;
  j["seed"] = o.seed;
  j["val_fraction"] = o.val_fraction;
  j["by_system_split"] = o.by_system;
  j["hidden_dims"] = o.hidden_dims;
  return j;
}

/// Every command drops the effective config next to its primary output.
void write_config_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write config echo: " + path.string());
  out << j.dump(2) << '\n';
  qamro::log_info("wrote " + path.string());
}

fs::path config_sidecar(fs::path out) {
  out.replace_extension(".config.json");
  return out;
}

template <typename WriteBody>
void write_file(const fs::path& path, WriteBody&& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  qamro::log_info("wrote " + path.string());
}

int run_train(const std::string& data_path, const std::string& out_dir,
              const CommonOpts& opts) {
  const auto samples =
      qamro::load_dataset(data_path, opts.loss.scale_min, opts.loss.scale_max);
  const qamro::RunConfig rc = to_run_config(opts);
  const qamro::RunOutcome outcome =
      qamro::train_and_evaluate(samples, rc, opts.seed);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  qamro::save_checkpoint(dir / "checkpoint.json", outcome.model,
                         rc.train.loss);
  qamro::log_info("wrote " + (dir / "checkpoint.json").string());
  write_file(dir / "metrics.csv", [&](std::ostream& os) {
    qamro::write_metrics_csv(os, outcome.metrics);
  });
  write_file(dir / "train_log.csv", [&](std::ostream& os) {
    qamro::write_train_log_csv(os, outcome.log, outcome.model.head_names());
  });

  ordered_json cfg = common_to_json(opts);
  cfg["command"] = "train";
  cfg["data"] = data_path;
  cfg["out"] = out_dir;
  write_config_json(dir / "config.json", cfg);

  qamro::log_info("best epoch " + std::to_string(outcome.log.best_epoch) +
                  " of " + std::to_string(outcome.log.stopped_epoch) +
                  ", best val loss " + qamro::format_double(outcome.log.best_val));
  return 0;
}

int run_eval(const std::string& data_path, const std::string& checkpoint_path,
             const std::string& out_path, bool clip_level) {
  const qamro::Checkpoint cp = qamro::load_checkpoint(checkpoint_path);
  const auto samples = qamro::load_dataset(data_path, cp.loss.scale_min,
                                           cp.loss.scale_max);
  const qamro::MetricsReport report =
      qamro::evaluate_model(cp.regressor, samples, cp.loss, clip_level);

  write_file(out_path, [&](std::ostream& os) {
    qamro::write_metrics_csv(os, report);
  });

  ordered_json cfg;
  cfg["command"] = "eval";
  cfg["data"] = data_path;
  cfg["checkpoint"] = checkpoint_path;
  cfg["out"] = out_path;
  cfg["clip_level"] = clip_level;
  cfg["loss"] = loss_to_json(cp.loss);
  write_config_json(config_sidecar(out_path), cfg);
  return 0;
}

int run_ablate(const std::string& data_path, const std::string& out_path,
               const CommonOpts& opts, const std::vector<std::uint64_t>& seeds) {
  const auto samples =
      qamro::load_dataset(data_path, opts.loss.scale_min, opts.loss.scale_max);
  const qamro::RunConfig rc = to_run_config(opts);
  const auto rows = qamro::run_ablation(samples, rc, seeds);

  write_file(out_path, [&](std::ostream& os) {
    qamro::write_ablation_csv(os, rows);
  });

  ordered_json cfg = common_to_json(opts);
  cfg["command"] = "ablate";
  cfg["data"] = data_path;
  cfg["out"] = out_path;
  cfg["seeds"] = seeds;
  write_config_json(config_sidecar(out_path), cfg);
  return 0;
}

int run_sweep(const std::string& data_path, const std::string& out_path,
              const CommonOpts& opts, const std::vector<double>& betas,
              const std::vector<std::uint64_t>& seeds) {
  const auto samples =
      qamro::load_dataset(data_path, opts.loss.scale_min, opts.loss.scale_max);
  const qamro::RunConfig rc = to_run_config(opts);
  const auto rows = qamro::run_beta_sweep(samples, rc, betas, seeds);

  write_file(out_path, [&](std::ostream& os) {
    qamro::write_sweep_csv(os, rows);
  });

  ordered_json cfg = common_to_json(opts);
  cfg["command"] = "sweep-beta";
  cfg["data"] = data_path;
  cfg["out"] = out_path;
  cfg["betas"] = betas;
  cfg["seeds"] = seeds;
  write_config_json(config_sidecar(out_path), cfg);
  return 0;
}

int run_grad_check(const std::string& loss_name, int trials,
                   std::uint64_t seed, double tolerance, double fd_step,
                   const std::string& out_path) {
  qamro::GradCheckOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  opts.tolerance = tolerance;
  opts.fd_step = fd_step;

  const auto kind = qamro::parse_loss_kind(loss_name);
  const auto report = qamro::check_loss_gradient(kind, opts);

  if (report.trials == 0)
    std::cout << "warning: 0 trials requested, result is vacuous\n";
  std::cout << "loss=" << qamro::loss_kind_name(report.kind)
            << " trials=" << report.trials
            << " max_rel_error=" << qamro::format_double(report.max_rel_error)
            << " tolerance=" << qamro::format_double(report.tolerance)
            << " status=" << (report.passed() ? "pass" : "FAIL") << "\n";
  std::size_t shown = 0;
  for (const auto& f : report.failures) {
    if (++shown > 10) {
      std::cout << "  ... " << report.failures.size() - 10 << " more\n";
      break;
    }
    std::cout << "  trial " << f.trial << " coord " << f.coordinate
              << ": analytic=" << qamro::format_double(f.analytic)
              << " numeric=" << qamro::format_double(f.numeric)
              << " rel_error=" << qamro::format_double(f.rel_error) << "\n";
  }

  if (!out_path.empty()) {
    write_file(out_path, [&](std::ostream& os) {
      os << "loss,trials,max_rel_error,tolerance,passed\n";
      os << qamro::loss_kind_name(report.kind) << ',' << report.trials << ','
         << qamro::format_double(report.max_rel_error) << ','
         << qamro::format_double(report.tolerance) << ','
         << (report.passed() ? "true" : "false") << '\n';
    });
    ordered_json cfg;
    cfg["command"] = "grad-check";
    cfg["loss"] = loss_name;
    cfg["trials"] = trials;
    cfg["seed"] = seed;
    cfg["tolerance"] = tolerance;
    cfg["fd_step"] = fd_step;
    cfg["out"] = out_path;
    write_config_json(config_sidecar(out_path), cfg);
  }
  return report.passed() ? 0 : 1;
}

int run_gen_synth(const qamro::SynthSpec& spec, const std::string& out_path) {
  const auto samples = qamro::generate_synthetic(spec);
  qamro::save_dataset(fs::path(out_path), samples);
  qamro::log_info("wrote " + out_path);

  double lo = spec.scale_max, hi = spec.scale_min;
  std::set<std::string> systems;
  for (const auto& s : samples) {
    systems.insert(s.system_id);
    for (const auto& [dim, v] : s.scores) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::cout << "systems=" << systems.size() << " clips=" << samples.size()
            << " feature_dim=" << spec.feature_dim
            << " score_range=[" << qamro::format_double(lo) << ", "
            << qamro::format_double(hi) << "]\n";

  ordered_json cfg;
  cfg["command"] = "gen-synth";
  cfg["n_systems"] = spec.n_systems;
  cfg["clips_per_system"] = spec.clips_per_system;
  cfg["feature_dim"] = spec.feature_dim;
  cfg["dimensions"] = spec.dimension_names;
  cfg["quality_spread"] = spec.system_quality_spread;
  cfg["clip_noise_sd"] = spec.clip_noise_sd;
  cfg["signal_to_noise"] = spec.signal_to_noise;
  cfg["scale_min"] = spec.scale_min;
  cfg["scale_max"] = spec.scale_max;
  cfg["seed"] = spec.seed;
  cfg["out"] = out_path;
  write_config_json(config_sidecar(out_path), cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quality-aware ranking losses for MOS prediction"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read option defaults from a TOML/INI file");

  int rc = 0;

  // train
  CommonOpts train_opts;
  std::string train_data, train_out;
  auto* train_cmd = app.add_subcommand(
      "train", "train a regressor and report validation metrics");
  train_cmd->add_option("--data", train_data, "JSONL dataset")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "output directory")->required();
  add_train_flags(train_cmd, train_opts);
  train_cmd->callback(
      [&] { rc = run_train(train_data, train_out, train_opts); });

  // eval
  std::string eval_data, eval_checkpoint, eval_out;
  bool eval_clip_level = false;
  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--data", eval_data, "JSONL dataset")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "metrics CSV path")->required();
  eval_cmd->add_flag("--clip-level", eval_clip_level,
                     "skip system aggregation (debugging)");
  eval_cmd->callback([&] {
    rc = run_eval(eval_data, eval_checkpoint, eval_out, eval_clip_level);
  });

  // ablate
  CommonOpts ablate_opts;
  std::string ablate_data, ablate_out;
  std::vector<std::uint64_t> ablate_seeds = {1};
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "run the four loss variants over a seed list");
  ablate_cmd->add_option("--data", ablate_data, "JSONL dataset")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out", ablate_out, "result CSV path")->required();
  ablate_cmd->add_option("--seeds", ablate_seeds, "run seeds")
      ->delimiter(',')
      ->capture_default_str();
  add_train_flags(ablate_cmd, ablate_opts);
  ablate_cmd->callback([&] {
    rc = run_ablate(ablate_data, ablate_out, ablate_opts, ablate_seeds);
  });

  // sweep-beta
  CommonOpts sweep_opts;
  std::string sweep_data, sweep_out;
  std::vector<double> sweep_betas = {1, 3, 5, 7, 9};
  std::vector<std::uint64_t> sweep_seeds = {1};
  auto* sweep_cmd = app.add_subcommand(
      "sweep-beta", "train across a list of beta values");
  sweep_cmd->add_option("--data", sweep_data, "JSONL dataset")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep_out, "result CSV path")->required();
  sweep_cmd->add_option("--betas", sweep_betas, "beta values (>= 1)")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep_seeds, "run seeds")
      ->delimiter(',')
      ->capture_default_str();
  add_train_flags(sweep_cmd, sweep_opts);
  sweep_cmd->callback([&] {
    rc = run_sweep(sweep_data, sweep_out, sweep_opts, sweep_betas, sweep_seeds);
  });

  // grad-check
  std::string gc_loss = "qamro", gc_out;
  int gc_trials = 1000;
  std::uint64_t gc_seed = 0;
  double gc_tolerance = 1e-5, gc_step = 1e-5;
  auto* gc_cmd = app.add_subcommand(
      "grad-check", "compare analytic loss gradients to finite differences");
  gc_cmd->add_option("--loss", gc_loss, "mr, qamro, huber, or combined")
      ->check(CLI::IsMember({"mr", "qamro", "huber", "combined"}))
      ->capture_default_str();
  gc_cmd->add_option("--trials", gc_trials, "random configurations to test")
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed, "sampling seed")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc_tolerance, "max relative error")
      ->capture_default_str();
  gc_cmd->add_option("--fd-step", gc_step, "central difference step")
      ->capture_default_str();
  gc_cmd->add_option("--out", gc_out, "optional report CSV path");
  gc_cmd->callback([&] {
    rc = run_grad_check(gc_loss, gc_trials, gc_seed, gc_tolerance, gc_step,
                        gc_out);
  });

  // gen-synth
  qamro::SynthSpec spec;
  std::string synth_out;
  auto* synth_cmd =
      app.add_subcommand("gen-synth", "write a synthetic JSONL dataset");
  synth_cmd->add_option("--out", synth_out, "output JSONL path")->required();
  synth_cmd->add_option("--n-systems", spec.n_systems, "number of systems")
      ->capture_default_str();
  synth_cmd
      ->add_option("--clips-per-system", spec.clips_per_system,
                   "clips per system")
      ->capture_default_str();
  synth_cmd->add_option("--feature-dim", spec.feature_dim, "feature width")
      ->capture_default_str();
  synth_cmd
      ->add_option("--dimensions", spec.dimension_names,
                   "rating dimension names")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd
      ->add_option("--quality-spread", spec.system_quality_spread,
                   "score units between worst and best system mean")
      ->capture_default_str();
  synth_cmd->add_option("--clip-noise-sd", spec.clip_noise_sd,
                        "per-clip score noise")
      ->capture_default_str();
  synth_cmd
      ->add_option("--signal-to-noise", spec.signal_to_noise,
                   "informative share of feature variance")
      ->capture_default_str();
  synth_cmd->add_option("--scale-min", spec.scale_min, "rating scale lower bound")
      ->capture_default_str();
  synth_cmd->add_option("--scale-max", spec.scale_max, "rating scale upper bound")
      ->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed, "generator seed")
      ->capture_default_str();
  synth_cmd->callback([&] { rc = run_gen_synth(spec, synth_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
