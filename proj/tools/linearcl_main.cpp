#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "linearcl/harness.hpp"

namespace {

using namespace linearcl;

void add_generator_options(CLI::App* cmd, GeneratorConfig& gen) {
  cmd->add_option("--generator", gen.name,
                  "gaussian_linear | spectrum_controlled | rotated | permuted | csv");
  cmd->add_option("--tasks", gen.tasks, "number of tasks T");
  cmd->add_option("--samples", gen.samples, "samples per task");
  cmd->add_option("--dim", gen.dim, "raw input dimension");
  cmd->add_option("--decay", gen.decay, "covariance eigenvalue decay in (0, 1]");
  cmd->add_option("--degrees", gen.degrees_per_task, "rotation per task in degrees");
  cmd->add_option("--noise", gen.noise_scale, "label noise scale");
  cmd->add_option("--loc-x", gen.loc_x, "feature mean");
  cmd->add_option("--scale-x", gen.scale_x, "feature scale");
  cmd->add_option("--loc-w", gen.loc_w, "weight mean");
  cmd->add_option("--scale-w", gen.scale_w, "weight scale");
  cmd->add_option("--sequence", gen.path, "task sequence CSV (generator = csv)");
  cmd->add_option("--classes", gen.classes, "bucket labels into one-hot classes");
  cmd->add_option("--map", gen.map, "identity | random_fourier | random_relu");
  cmd->add_option("--map-dim", gen.map_dim, "feature dimension for non-identity maps");
  cmd->add_option("--map-seed", gen.map_seed, "feature map seed");
}

int cmd_gen(const GeneratorConfig& gen, std::uint64_t seed, const std::string& out) {
  const TaskSequence seq = build_sequence(gen, seed);
  save_csv(seq, out);
  std::cout << "wrote " << out << " (" << seq.size() << " tasks, n=" << seq.task(1).samples()
            << ", q=" << seq.input_dim() << ", c=" << seq.label_dim() << ")\n";
  return 0;
}

int cmd_run(ExperimentConfig cfg) {
  run_experiment(cfg);
  std::cout << "run " << cfg.hash() << " complete; outputs under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_analyze(ExperimentConfig cfg) {
  cfg.analyses = {"cf", "bounds", "metrics"};
  run_experiment(cfg);
  std::cout << "analysis " << cfg.hash() << " written under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_spectrum(ExperimentConfig cfg) {
  cfg.analyses = {"spectra"};
  run_experiment(cfg);
  std::cout << "spectra " << cfg.hash() << " written under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_metrics(const std::string& path) {
  const auto table = metrics_from_runs_csv(path);
  std::cout << "cell,A_T,F_T\n";
  for (const auto& [label, summary] : table)
    std::cout << label << "," << format_double(summary.average) << ","
              << format_double(summary.forgetting) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continual-learning analysis lab for the constant-kernel regime"};
  app.require_subcommand(1);

  // gen
  GeneratorConfig gen_cfg;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "sequence.csv";
  CLI::App* gen = app.add_subcommand("gen", "generate a task sequence CSV");
  add_generator_options(gen, gen_cfg);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path");

  // shared run/analyze/spectrum state
  ExperimentConfig run_cfg;
  std::string config_path;
  std::vector<std::string> method_names;
  std::vector<std::uint64_t> seed_list;
  std::vector<int> memory_list;
  bool iterative_check = false;
  bool normalize_drift = false;

  auto add_run_options = [&](CLI::App* cmd, bool with_config) {
    if (with_config) cmd->add_option("--config", config_path, "experiment config file");
    add_generator_options(cmd, run_cfg.generator);
    cmd->add_option("--out", run_cfg.out_dir, "output directory");
    cmd->add_option("--method", method_names, "method (repeatable)");
    cmd->add_option("--seed", seed_list, "seed (repeatable)");
    cmd->add_option("--lambda", run_cfg.lambda, "weight decay > 0");
    cmd->add_option("--lr", run_cfg.lr, "learning rate for the iterative path");
    cmd->add_option("--max-iters", run_cfg.max_iters, "gradient descent iteration cap");
    cmd->add_option("--grad-tol", run_cfg.grad_tol, "projected gradient stop threshold");
    cmd->add_option("--components", run_cfg.components, "memory directions per task d");
    cmd->add_option("--pca-samples", run_cfg.pca_samples, "PCA sample count s");
    cmd->add_option("--memory", memory_list, "memory size for spectra (repeatable)");
    cmd->add_flag("--iterative-check", iterative_check,
                  "cross-check closed form against gradient descent");
    cmd->add_flag("--normalize-drift", normalize_drift,
                  "divide forgetting by the source sample count");
  };

  CLI::App* run = app.add_subcommand("run", "execute an experiment grid");
  add_run_options(run, true);
  CLI::App* analyze = app.add_subcommand(
      "analyze", "drift records for a stored sequence or generator");
  add_run_options(analyze, true);
  CLI::App* spectrum = app.add_subcommand("spectrum", "overlap spectra per memory size");
  add_run_options(spectrum, true);

  CLI::App* compare = app.add_subcommand("compare", "comparison CSV from a run directory");
  std::string compare_dir;
  compare->add_option("--in", compare_dir, "run output directory")->required();

  CLI::App* metrics = app.add_subcommand("metrics", "A_T / F_T from a runs.csv");
  std::string metrics_path;
  metrics->add_option("--in", metrics_path, "runs.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_cfg, gen_seed, gen_out);

    if (run->parsed() || analyze->parsed() || spectrum->parsed()) {
      CLI::App* active = run->parsed() ? run : (analyze->parsed() ? analyze : spectrum);
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config_file(config_path);
      // Command-line values override the config file.
      if (active->count("--generator")) cfg.generator.name = run_cfg.generator.name;
      if (active->count("--tasks")) cfg.generator.tasks = run_cfg.generator.tasks;
      if (active->count("--samples")) cfg.generator.samples = run_cfg.generator.samples;
      if (active->count("--dim")) cfg.generator.dim = run_cfg.generator.dim;
      if (active->count("--decay")) cfg.generator.decay = run_cfg.generator.decay;
      if (active->count("--degrees"))
        cfg.generator.degrees_per_task = run_cfg.generator.degrees_per_task;
      if (active->count("--noise")) cfg.generator.noise_scale = run_cfg.generator.noise_scale;
      if (active->count("--loc-x")) cfg.generator.loc_x = run_cfg.generator.loc_x;
      if (active->count("--scale-x")) cfg.generator.scale_x = run_cfg.generator.scale_x;
      if (active->count("--loc-w")) cfg.generator.loc_w = run_cfg.generator.loc_w;
      if (active->count("--scale-w")) cfg.generator.scale_w = run_cfg.generator.scale_w;
      if (active->count("--sequence")) {
        cfg.generator.path = run_cfg.generator.path;
        cfg.generator.name = "csv";
      }
      if (active->count("--classes")) cfg.generator.classes = run_cfg.generator.classes;
      if (active->count("--map")) cfg.generator.map = run_cfg.generator.map;
      if (active->count("--map-dim")) cfg.generator.map_dim = run_cfg.generator.map_dim;
      if (active->count("--map-seed")) cfg.generator.map_seed = run_cfg.generator.map_seed;
      if (active->count("--out")) cfg.out_dir = run_cfg.out_dir;
      if (active->count("--lambda")) cfg.lambda = run_cfg.lambda;
      if (active->count("--lr")) cfg.lr = run_cfg.lr;
      if (active->count("--max-iters")) cfg.max_iters = run_cfg.max_iters;
      if (active->count("--grad-tol")) cfg.grad_tol = run_cfg.grad_tol;
      if (active->count("--components")) cfg.components = run_cfg.components;
      if (active->count("--pca-samples")) cfg.pca_samples = run_cfg.pca_samples;
      if (!method_names.empty()) {
        cfg.methods.clear();
        for (const std::string& m : method_names) cfg.methods.push_back(parse_method(m));
      }
      if (!seed_list.empty()) cfg.seeds = seed_list;
      if (!memory_list.empty()) cfg.memories = memory_list;
      if (iterative_check) cfg.iterative_check = true;
      if (normalize_drift) cfg.normalize_drift = true;

      if (run->parsed()) return cmd_run(cfg);
      if (analyze->parsed()) return cmd_analyze(cfg);
      return cmd_spectrum(cfg);
    }

    if (compare->parsed()) {
      compare_report(compare_dir);
      std::cout << "wrote " << (std::filesystem::path(compare_dir) / "compare.csv").string()
                << "\n";
      return 0;
    }
    if (metrics->parsed()) return cmd_metrics(metrics_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
