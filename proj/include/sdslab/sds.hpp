// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdslab/camera.hpp"
#include "sdslab/codec.hpp"
#include "sdslab/hand.hpp"
#include "sdslab/optimizer.hpp"
#include "sdslab/render.hpp"
#include "sdslab/schedule.hpp"
#include "sdslab/score_model.hpp"
#include "sdslab/voxel_field.hpp"

namespace sdslab {

class Rng;

struct DivergenceError : std::runtime_error {
  int iteration;
  std::string component;
  DivergenceError(int iter, std::string comp)
      : std::runtime_error("non-finite " + comp + " at iteration " +
                           std::to_string(iter)),
        iteration(iter),
        component(std::move(comp)) {}
};

struct LossWeights {
  double lambda_sds = 1.0;
  double lambda_img = 0.01;
  double lambda_zvar = 100.0;
};

struct Toggles {
  bool skeleton_condition = true;
  bool shape_init = true;
  bool chs_loss = true;
};

struct IterationRecord {
  int iter = 0;
  int t = 0;
  double lambda_chs = 0.0;
  double loss_sds = 0.0;
  double loss_chs = 0.0;
  double loss_img = 0.0;
  double loss_zvar = 0.0;
  double loss_total = 0.0;
  double seconds = 0.0;
};

struct StageReport {
  std::vector<IterationRecord> rows;
  std::string csv(bool record_timing) const;
  void write_csv(const std::filesystem::path& path, bool record_timing) const;
};

// Everything a run shares across iterations: schedules, codec, landscape,
// posed hand, camera ring with precomputed rays, silhouette targets and the
// per-camera (possibly condition-restricted) mode lists.
struct SdsContext {
  std::unique_ptr<NoiseSchedule> schedule;
  AnnealingPlan plan;
  LatentCodec codec;
  ViewLandscape landscape;
  CapsuleHand hand;  // run prior, already posed
  std::vector<Camera> cameras;
  std::vector<std::string> cam_buckets;
  std::vector<CameraRays> cam_rays;       // at image_size (SDS + stage 1)
  std::vector<Image> masks;               // silhouettes at image_size
  std::vector<CameraRays> chs_rays;       // at chs_image_size
  std::vector<Image> chs_masks;           // silhouettes at chs_image_size
  std::vector<OpacityTape> chs_tapes;     // fixed-sampling CHS fast path
  std::vector<std::vector<GaussianMode>> cam_modes;  // effective per camera
  std::vector<ConditionKey> cam_keys;
  int ray_samples = 24;
  bool jitter = true;  // stochastic sampling of the per-iteration SDS render

  SdsContext() = default;
  SdsContext(const SdsContext&) = delete;
  SdsContext& operator=(const SdsContext&) = delete;
  SdsContext(SdsContext&&) = default;
  SdsContext& operator=(SdsContext&&) = default;
};

// Stage 1: fit the field's normalized opacity to the silhouette masks by
// mean-squared error over the camera ring.
StageReport init_stage(VoxelField& field, const SdsContext& ctx, int iters,
                       const AdamParams& adam, Rng& rng,
                       bool record_timing = false);

// Mean over cameras of the per-pixel squared error between normalized
// opacity and silhouette mask (the stage-1 objective, reusable as a metric).
double silhouette_mse(const VoxelField& field, const SdsContext& ctx);

// Weighted corrective-shape loss: lambda * (1/|V|) sum_v rms(O_v - M_v),
// with the gradient accumulated into sigma-space (pre-chain).
double chs_loss_accumulate(const VoxelField& field, const SdsContext& ctx,
                           double lambda, const RaySampling& sampling,
                           double* d_sigma);

// Convenience wrapper returning the raw-parameter gradient.
std::pair<double, FieldGradient> chs_loss(const VoxelField& field,
                                          const SdsContext& ctx, int t,
                                          const RaySampling& sampling);

// Image-space fidelity term: MSE between the render and a constant target.
std::pair<double, Image> img_loss(const Image& render_img, const Image& target);

// Depth-variance sharpening term over foreground pixels (opacity > 0.5).
// Returns the loss and the adjoint image on depth_variance.
std::pair<double, Image> zvar_loss(const RenderOutput& render);

struct SdsStepResult {
  FieldGradient grad;
  std::vector<double> latent_residual;  // eps_hat - eps
  double loss_sds = 0.0;                // 0.5 * |eps_hat - eps|^2
  int t = 0;
};

// One score-distillation step: render, noise, predict, back-propagate
// (eps_hat - eps) through the codec and the renderer. eps_override replaces
// the noise draw (tests, gradient-field dumps).
SdsStepResult sds_step(const VoxelField& field, const SdsContext& ctx,
                       int camera_index, int i, Rng& rng,
                       const std::vector<double>* eps_override = nullptr);

// Stage 2: the full per-iteration combination of SDS, CHS, image and
// z-variance losses with round-robin camera selection.
StageReport optimize_stage2(VoxelField& field, const SdsContext& ctx,
                            const LossWeights& weights, const Toggles& toggles,
                            int iters, const AdamParams& adam, Rng& rng,
                            bool record_timing = false);

}  // namespace sdslab
