// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "sdslab/voxel_field.hpp"

namespace sdslab {

struct AdamParams {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Adaptive-moment descent over the raw field parameters. Moment buffers are
// owned here; step count increments by exactly one per update.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t cells, const AdamParams& params);

  void step(VoxelField& field, const FieldGradient& grad);

  std::int64_t step_count() const { return step_count_; }
  const AdamParams& params() const { return params_; }
  bool moments_finite() const;

 private:
  AdamParams params_;
  std::int64_t step_count_ = 0;
  std::vector<double> m_density_, v_density_;
  std::vector<double> m_color_[3], v_color_[3];
};

}  // namespace sdslab
