// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace sdslab {

class Rng;

// Forward-process noise schedule: per-step variances beta_t and the
// cumulative signal-retention coefficients alpha_bar_t = prod_{s<=t}(1-beta_s).
// Timesteps are 1-based, t in [1, num_steps].
struct NoiseSchedule {
  int num_steps = 0;
  std::vector<double> betas;       // length num_steps
  std::vector<double> alpha_bars;  // length num_steps, strictly decreasing

  // Linear beta ramp (the standard DDPM choice).
  static NoiseSchedule linear(int num_steps = 1000, double beta_start = 1e-4,
                              double beta_end = 2e-2);

  double alpha_bar(int t) const;  // throws std::out_of_range outside [1, T]
};

// z_t = sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps
std::vector<double> forward_noise(const std::vector<double>& z0, int t,
                                  const std::vector<double>& eps,
                                  const NoiseSchedule& schedule);

// Square-root timestep annealing and the linearly annealed corrective-shape
// weight. timestep_real keeps the exact algebraic link between the two
// lambda formulations; rounding happens only when indexing the schedule.
struct AnnealingPlan {
  int t_max = 600;
  int t_min = 300;
  int i_max = 8000;
  double lambda_max_chs = 15000.0;
  double lambda_min_chs = 1000.0;

  void validate() const;  // throws std::invalid_argument on bad bounds

  // t(i) = t_max - (t_max - t_min) * sqrt(i / i_max), unrounded
  double timestep_real(double i) const;
  // nearest-integer timestep for schedule indexing
  int timestep_at(double i) const;
  // lambda(t) = lmax*(t-tmin)/(tmax-tmin) + lmin*(tmax-t)/(tmax-tmin),
  // clamped to the boundary value outside [t_min, t_max]
  double lambda_chs_at_t(double t) const;
  // lambda(i) = lmax - (lmax - lmin) * sqrt(i / i_max)
  double lambda_chs_at_iter(double i) const;
};

}  // namespace sdslab
