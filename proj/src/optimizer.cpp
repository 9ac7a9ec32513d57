// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "sdslab/kernels.hpp"

namespace sdslab {

AdamOptimizer::AdamOptimizer(std::size_t cells, const AdamParams& params)
    : params_(params) {
  if (!(params.lr > 0.0)) throw std::invalid_argument("adam lr must be > 0");
  m_density_.assign(cells, 0.0);
  v_density_.assign(cells, 0.0);
  for (int c = 0; c < 3; ++c) {
    m_color_[c].assign(cells, 0.0);
    v_color_[c].assign(cells, 0.0);
  }
}

void AdamOptimizer::step(VoxelField& field, const FieldGradient& grad) {
  const std::size_t n = m_density_.size();
  if (grad.d_raw_density.size() != n)
    throw std::invalid_argument("adam: gradient size mismatch");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(params_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(params_.beta2, step_count_);
  const auto& ops = kernels::active();
  ops.adam_step(field.raw_density().data(), m_density_.data(),
                v_density_.data(), grad.d_raw_density.data(), n, params_.lr,
                params_.beta1, params_.beta2, params_.eps, bc1, bc2);
  for (int c = 0; c < 3; ++c)
    ops.adam_step(field.raw_color(c).data(), m_color_[c].data(),
                  v_color_[c].data(), grad.d_raw_color[c].data(), n,
                  params_.lr, params_.beta1, params_.beta2, params_.eps, bc1,
                  bc2);
  field.refresh();
}

bool AdamOptimizer::moments_finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!ok(m_density_) || !ok(v_density_)) return false;
  for (int c = 0; c < 3; ++c)
    if (!ok(m_color_[c]) || !ok(v_color_[c])) return false;
  return true;
}

}  // namespace sdslab
