// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdslab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative experiment description. Serialized as a flat UTF-8
// key = value file with '#' comments; arrays are comma-separated.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "run";

  int field_resolution = 48;
  double field_extent = 1.2;
  int image_size = 64;
  int latent_size = 16;
  int ray_samples = 20;
  int chs_image_size = 24;

  int camera_count = 8;
  double camera_radius = 2.4;
  double camera_fov = 50.0;
  std::vector<double> camera_elevations = {15.0};

  std::string hand_geometry = "hand5";
  std::string pose_label = "open";
  std::vector<double> pose_curl = {0.30, 0.25, 0.20, 0.25, 0.30};
  std::vector<double> pose_spread = {-0.20, -0.10, 0.0, 0.10, 0.20};

  std::vector<std::string> landscape_geometries = {"hand5", "hand4"};
  std::vector<double> landscape_weights = {0.5, 0.5};

  int diffusion_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int t_max = 600;
  int t_min = 300;
  double lambda_chs_max = 15000.0;
  double lambda_chs_min = 1000.0;

  double lambda_sds = 1.0;
  double lambda_img = 0.01;
  double lambda_zvar = 100.0;

  bool skeleton_condition = true;
  bool shape_init = true;
  bool chs_loss = true;

  int iters_init = 500;
  int iters_sds = 2000;
  double lr_init = 0.1;
  double lr_sds = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;

  bool jitter = true;
  bool record_timing = false;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const;  // throws ConfigError naming the offending field

  std::string emit() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Output directory, honoring the SDSLAB_OUT root override.
  std::filesystem::path resolved_out_dir() const;
};

}  // namespace sdslab
