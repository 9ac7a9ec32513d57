// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdslab/kernels.hpp"

namespace sdslab {

NoiseSchedule NoiseSchedule::linear(int num_steps, double beta_start,
                                    double beta_end) {
  if (num_steps < 2) throw std::invalid_argument("schedule needs >= 2 steps");
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end))
    throw std::invalid_argument("betas must satisfy 0 < start <= end < 1");
  NoiseSchedule s;
  s.num_steps = num_steps;
  s.betas.resize(num_steps);
  s.alpha_bars.resize(num_steps);
  double prod = 1.0;
  for (int i = 0; i < num_steps; ++i) {
    s.betas[i] = beta_start + (beta_end - beta_start) * i / (num_steps - 1);
    prod *= 1.0 - s.betas[i];
    s.alpha_bars[i] = prod;
  }
  return s;
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 1 || t > num_steps)
    throw std::out_of_range("timestep " + std::to_string(t) +
                            " outside [1, " + std::to_string(num_steps) + "]");
  return alpha_bars[t - 1];
}

std::vector<double> forward_noise(const std::vector<double>& z0, int t,
                                  const std::vector<double>& eps,
                                  const NoiseSchedule& schedule) {
  if (z0.size() != eps.size())
    throw std::invalid_argument("forward_noise: z0 and eps sizes differ (" +
                                std::to_string(z0.size()) + " vs " +
                                std::to_string(eps.size()) + ")");
  const double ab = schedule.alpha_bar(t);
  std::vector<double> zt(z0.size());
  kernels::active().axpbyz(std::sqrt(ab), z0.data(), std::sqrt(1.0 - ab),
                           eps.data(), zt.data(), z0.size());
  return zt;
}

void AnnealingPlan::validate() const {
  if (!(t_max > t_min && t_min >= 1))
    throw std::invalid_argument("annealing requires t_max > t_min >= 1");
  if (i_max < 1) throw std::invalid_argument("annealing requires i_max >= 1");
  if (!(lambda_max_chs >= lambda_min_chs && lambda_min_chs >= 0.0))
    throw std::invalid_argument(
        "annealing requires lambda_max >= lambda_min >= 0");
}

double AnnealingPlan::timestep_real(double i) const {
  if (i < 0.0 || i > static_cast<double>(i_max))
    throw std::out_of_range("iteration " + std::to_string(i) +
                            " outside [0, " + std::to_string(i_max) + "]");
  return t_max - (t_max - t_min) * std::sqrt(i / i_max);
}

int AnnealingPlan::timestep_at(double i) const {
  return static_cast<int>(std::llround(timestep_real(i)));
}

double AnnealingPlan::lambda_chs_at_t(double t) const {
  if (t < t_min) t = t_min;
  if (t > t_max) t = t_max;
  const double span = static_cast<double>(t_max - t_min);
  return lambda_max_chs * ((t - t_min) / span) +
         lambda_min_chs * ((t_max - t) / span);
}

double AnnealingPlan::lambda_chs_at_iter(double i) const {
  if (i < 0.0 || i > static_cast<double>(i_max))
    throw std::out_of_range("iteration " + std::to_string(i) +
                            " outside [0, " + std::to_string(i_max) + "]");
  return lambda_max_chs -
         (lambda_max_chs - lambda_min_chs) * std::sqrt(i / i_max);
}

}  // namespace sdslab
