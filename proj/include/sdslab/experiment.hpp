// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdslab/config.hpp"
#include "sdslab/sds.hpp"

namespace sdslab {

struct ModeAssignmentEntry {
  int camera_index = 0;
  std::string bucket;
  std::string label;     // nearest clean-mode label
  double distance = 0.0; // latent Euclidean distance
};

struct ModeAssignment {
  std::vector<ModeAssignmentEntry> views;
  std::string majority_label;
  double consistency = 0.0;  // fraction agreeing with the majority

  std::string csv() const;
};

struct RunReport {
  ExperimentConfig config;
  StageReport init_report;
  StageReport sds_report;
  ModeAssignment assignment;
  double final_silhouette_mse = 0.0;
  double final_chs_rms = 0.0;  // unweighted mean per-view RMS vs masks
  std::vector<std::string> artifacts;  // paths relative to the run directory
  std::uint64_t checksum = 0;          // over the emitted CSV bytes
};

// Build the per-run state (schedule, landscape, cameras, masks, conditioned
// mode lists) from a validated config.
SdsContext build_context(const ExperimentConfig& config);

// Full pipeline: optional stage 1, stage 2 with the configured toggles,
// artifact emission and mode assignment. Artifacts land in
// config.resolved_out_dir().
RunReport run_experiment(const ExperimentConfig& config);

// Nearest-mode assignment of final renders within each camera's bucket.
ModeAssignment mode_consistency(const std::vector<Image>& final_renders,
                                const std::vector<std::string>& cam_buckets,
                                const ViewLandscape& landscape);

// Recompute the assignment for a finished run directory from its emitted
// config and final renders.
ModeAssignment mode_consistency_of_run(const std::filesystem::path& run_dir);

// Latent-space SDS gradient samples at the current initialization for a
// fixed view, across timesteps and noise draws. noise_scale scales the
// noise draws (0 isolates the deterministic part of the gradient).
void gradient_field_dump(const ExperimentConfig& config,
                         const std::vector<int>& t_values, int draws,
                         const std::filesystem::path& out_csv,
                         double noise_scale = 1.0);

struct AblationRow {
  bool skeleton_condition, shape_init, chs_loss;
  double consistency_mean = 0.0, consistency_sd = 0.0;
  double chs_mean = 0.0, chs_sd = 0.0;
};

// The six toggle rows in table order, each run over all seeds.
std::vector<AblationRow> ablation_suite(const ExperimentConfig& base,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::filesystem::path& out_csv);

// The declared artifact set of a run with this config (relative paths).
std::vector<std::string> declared_artifacts(const ExperimentConfig& config);

}  // namespace sdslab
