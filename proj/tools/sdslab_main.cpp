// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdslab/experiment.hpp"
#include "sdslab/kernels.hpp"

namespace {

// "1..10" or "1,4,9"
std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(spec.substr(0, dots));
    const std::uint64_t hi = std::stoull(spec.substr(dots + 2));
    if (hi < lo) throw sdslab::ConfigError("seed range is empty: " + spec);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    seeds.push_back(std::stoull(spec.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (seeds.empty()) throw sdslab::ConfigError("empty seed list");
  return seeds;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    out.push_back(std::stoi(spec.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdslab: score-distillation laboratory on voxel hands"};
  app.require_subcommand(1);

  std::string kernel_backend;
  app.add_option("--kernel", kernel_backend,
                 "force a kernel backend (scalar, avx2)");

  std::string config_path, run_dir, t_spec = "50,600", seed_spec = "1..10";
  int draws = 20;
  double noise_scale = 1.0;

  auto* cmd_run = app.add_subcommand("run", "execute one experiment");
  cmd_run->add_option("config", config_path, "experiment config file")
      ->required();

  auto* cmd_grad = app.add_subcommand(
      "gradfield", "dump latent-space SDS gradient samples");
  cmd_grad->add_option("config", config_path, "experiment config file")
      ->required();
  cmd_grad->add_option("--t", t_spec, "comma-separated timesteps");
  cmd_grad->add_option("--draws", draws, "noise draws per timestep");
  cmd_grad->add_option("--noise-scale", noise_scale,
                       "scale on the noise draws (0 removes them)");

  auto* cmd_ablate = app.add_subcommand("ablate", "run the toggle ablation");
  cmd_ablate->add_option("config", config_path, "experiment config file")
      ->required();
  cmd_ablate->add_option("--seeds", seed_spec, "seed list, e.g. 1..10 or 1,2");

  auto* cmd_cons =
      app.add_subcommand("consistency", "recompute a run's mode assignment");
  cmd_cons->add_option("run_dir", run_dir, "finished run directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!kernel_backend.empty() && !sdslab::kernels::select(kernel_backend)) {
      std::fprintf(stderr, "kernel backend '%s' is not available\n",
                   kernel_backend.c_str());
      return 2;
    }

    if (cmd_run->parsed()) {
      const auto config = sdslab::ExperimentConfig::load(config_path);
      const auto report = sdslab::run_experiment(config);
      std::printf("run complete: %s\n",
                  config.resolved_out_dir().string().c_str());
      std::printf("mode consistency: %.3f (majority %s)\n",
                  report.assignment.consistency,
                  report.assignment.majority_label.c_str());
      std::printf("final silhouette mse: %.6f\n", report.final_silhouette_mse);
      std::printf("report checksum: %016llx\n",
                  static_cast<unsigned long long>(report.checksum));
    } else if (cmd_grad->parsed()) {
      const auto config = sdslab::ExperimentConfig::load(config_path);
      const auto out =
          config.resolved_out_dir() / "gradfield.csv";
      sdslab::gradient_field_dump(config, parse_int_list(t_spec), draws, out,
                                  noise_scale);
      std::printf("gradient field written: %s\n", out.string().c_str());
    } else if (cmd_ablate->parsed()) {
      const auto config = sdslab::ExperimentConfig::load(config_path);
      const auto out = config.resolved_out_dir() / "ablation.csv";
      const auto table =
          sdslab::ablation_suite(config, parse_seed_list(seed_spec), out);
      std::printf("ablation written: %s\n", out.string().c_str());
      for (std::size_t r = 0; r < table.size(); ++r)
        std::printf("row %zu: consistency %.3f +- %.3f, chs rms %.4f\n", r + 1,
                    table[r].consistency_mean, table[r].consistency_sd,
                    table[r].chs_mean);
    } else if (cmd_cons->parsed()) {
      const auto assignment = sdslab::mode_consistency_of_run(run_dir);
      std::printf("%s", assignment.csv().c_str());
      std::printf("consistency: %.3f\n", assignment.consistency);
    }
  } catch (const sdslab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sdslab::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
