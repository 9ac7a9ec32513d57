// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdslab/codec.hpp"
#include "sdslab/schedule.hpp"

namespace sdslab {

class Rng;

// One clean-data mode of the per-view latent distribution. label identifies
// the candidate geometry/pose that generated it (e.g. "hand5/open").
struct GaussianMode {
  std::vector<double> mu;
  double weight = 1.0;
  std::string label;
};

// Condition derived from a projected 2D skeleton. skeleton_label carries the
// semantic identity (geometry + pose) that mode compatibility is decided on;
// hash64 fingerprints the exact projected keypoints for determinism checks.
struct ConditionKey {
  std::string view_label;
  std::string skeleton_label;
  std::uint64_t hash64 = 0;
};

// The synthetic stand-in for the pretrained 2D diffusion model: one Gaussian
// mixture of clean modes per view-prompt bucket, with exact scores.
struct ViewLandscape {
  std::map<std::string, std::vector<GaussianMode>> buckets;
  LatentCodec codec;
  const NoiseSchedule* schedule = nullptr;

  void validate() const;  // non-empty buckets, consistent dims, weights sum 1
  const std::vector<GaussianMode>& bucket(const std::string& view_label) const;
};

// Score of an isotropic Gaussian N(mu, sigma2*I): -(z - mu) / sigma2.
std::vector<double> gaussian_score(const std::vector<double>& z,
                                   const std::vector<double>& mu,
                                   double sigma2);

double log_gaussian_density(const std::vector<double>& z,
                            const std::vector<double>& mu, double sigma2);

// log sum_k w_k N(z_t; sqrt(ab_t) mu_k, (1-ab_t) I), stable via log-sum-exp.
double log_noised_mixture_density(const std::vector<double>& z_t,
                                  const std::vector<GaussianMode>& bucket,
                                  int t, const NoiseSchedule& schedule);

// Exact gradient of the log noised-mixture density.
std::vector<double> noised_mixture_score(const std::vector<double>& z_t,
                                         const std::vector<GaussianMode>& bucket,
                                         int t, const NoiseSchedule& schedule);

// eps_hat = -sqrt(1 - ab_t) * score(z_t); with a condition present the
// bucket is restricted first.
std::vector<double> predict_noise(const std::vector<double>& z_t,
                                  const std::vector<GaussianMode>& bucket,
                                  int t, const NoiseSchedule& schedule);

// Restrict a bucket to the modes compatible with the key and renormalize
// the weights. Throws std::runtime_error naming the key and available
// labels when nothing matches.
std::vector<GaussianMode> condition(const ViewLandscape& landscape,
                                    const std::string& view_label,
                                    const ConditionKey& key);

struct InitScoreResult {
  double formula_value = 0.0;  // closed-form expected-score magnitude
  double mc_value = 0.0;       // Monte-Carlo expected-score magnitude
};

// Expected initial-score magnitude of an initialization against the ideal
// latent model, evaluated both in closed form and by averaging the exact
// noised-Gaussian score over n_eps forward-noise draws. noise_scale scales
// the eps draws (0 isolates the latent-gap term).
InitScoreResult expected_init_score(const std::vector<Image>& init_views,
                                    const std::vector<Image>& latent_views,
                                    int t, int n_eps,
                                    const LatentCodec& codec,
                                    const NoiseSchedule& schedule, Rng& rng,
                                    double noise_scale = 1.0);

}  // namespace sdslab
