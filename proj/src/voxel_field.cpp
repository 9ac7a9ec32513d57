// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/voxel_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sdslab/image.hpp"
#include "sdslab/kernels.hpp"

namespace sdslab {

VoxelField::VoxelField(int resolution, double extent)
    : res_(resolution), extent_(extent),
      n_(static_cast<std::size_t>(resolution) * resolution * resolution) {
  if (resolution < 2) throw std::invalid_argument("field resolution < 2");
  if (!(extent > 0.0)) throw std::invalid_argument("field extent <= 0");
  raw_density_.assign(n_, -40.0);
  for (auto& c : raw_color_) c.assign(n_, 0.0);
  refresh();
}

void VoxelField::refresh() {
  const auto& ops = kernels::active();
  sigma_.resize(n_);
  sigma_deriv_.resize(n_);
  ops.softplus(raw_density_.data(), sigma_.data(), n_);
  ops.logistic(raw_density_.data(), sigma_deriv_.data(), n_);
  for (int c = 0; c < 3; ++c) {
    color_[c].resize(n_);
    color_deriv_[c].resize(n_);
    ops.logistic(raw_color_[c].data(), color_[c].data(), n_);
    // d logistic = y (1 - y)
    for (std::size_t i = 0; i < n_; ++i) {
      const double y = color_[c][i];
      color_deriv_[c][i] = y * (1.0 - y);
    }
  }
}

double VoxelField::sigma_at(const Vec3& p) const {
  const double s = (res_ - 1) / (2.0 * extent_);
  const double fx = (p.x + extent_) * s;
  const double fy = (p.y + extent_) * s;
  const double fz = (p.z + extent_) * s;
  if (fx < 0.0 || fy < 0.0 || fz < 0.0 || fx > res_ - 1 || fy > res_ - 1 ||
      fz > res_ - 1)
    return 0.0;
  int i = std::min(static_cast<int>(fx), res_ - 2);
  int j = std::min(static_cast<int>(fy), res_ - 2);
  int k = std::min(static_cast<int>(fz), res_ - 2);
  const double ux = fx - i, uy = fy - j, uz = fz - k;
  const std::size_t base = index(i, j, k);
  const std::size_t sy = res_, sz = static_cast<std::size_t>(res_) * res_;
  const double* d = sigma_.data();
  const double c00 = d[base] * (1 - ux) + d[base + 1] * ux;
  const double c10 = d[base + sy] * (1 - ux) + d[base + sy + 1] * ux;
  const double c01 = d[base + sz] * (1 - ux) + d[base + sz + 1] * ux;
  const double c11 = d[base + sy + sz] * (1 - ux) + d[base + sy + sz + 1] * ux;
  return (c00 * (1 - uy) + c10 * uy) * (1 - uz) +
         (c01 * (1 - uy) + c11 * uy) * uz;
}

Vec3 VoxelField::sigma_gradient(const Vec3& p) const {
  const double h = 0.5 * cell_spacing();
  return {(sigma_at({p.x + h, p.y, p.z}) - sigma_at({p.x - h, p.y, p.z})) /
              (2 * h),
          (sigma_at({p.x, p.y + h, p.z}) - sigma_at({p.x, p.y - h, p.z})) /
              (2 * h),
          (sigma_at({p.x, p.y, p.z + h}) - sigma_at({p.x, p.y, p.z - h})) /
              (2 * h)};
}

VoxelField VoxelField::sphere_init(int resolution, double extent,
                                   double inside_density,
                                   double radius_fraction) {
  VoxelField f(resolution, extent);
  const double r = radius_fraction * extent;
  const double raw_in = inverse_softplus(inside_density);
  const double raw_out = inverse_softplus(1e-4);
  const double h = f.cell_spacing();
  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        const Vec3 p{-extent + i * h, -extent + j * h, -extent + k * h};
        f.raw_density_[f.index(i, j, k)] = norm(p) <= r ? raw_in : raw_out;
      }
  f.refresh();
  return f;
}

void VoxelField::save(const std::filesystem::path& path) const {
  std::string bytes = "SDSLAB-FIELD";
  const std::int32_t res32 = res_;
  const float ext32 = static_cast<float>(extent_);
  char buf[4];
  std::memcpy(buf, &res32, 4);
  bytes.append(buf, 4);
  std::memcpy(buf, &ext32, 4);
  bytes.append(buf, 4);
  auto append_grid = [&bytes](const std::vector<double>& g) {
    for (double v : g) {
      const float f32 = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f32, 4);
      bytes.append(b, 4);
    }
  };
  append_grid(sigma_);
  for (int c = 0; c < 3; ++c) append_grid(color_[c]);
  write_file_atomic(path, bytes);
}

void FieldGradient::clear() {
  std::fill(d_raw_density.begin(), d_raw_density.end(), 0.0);
  for (auto& c : d_raw_color) std::fill(c.begin(), c.end(), 0.0);
}

void FieldGradient::add_scaled(const FieldGradient& other, double scale) {
  const auto& ops = kernels::active();
  ops.add_scaled(d_raw_density.data(), scale, other.d_raw_density.data(),
                 d_raw_density.size());
  for (int c = 0; c < 3; ++c)
    ops.add_scaled(d_raw_color[c].data(), scale, other.d_raw_color[c].data(),
                   d_raw_color[c].size());
}

bool FieldGradient::finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(d_raw_density) && ok(d_raw_color[0]) && ok(d_raw_color[1]) &&
         ok(d_raw_color[2]);
}

double inverse_softplus(double sigma) {
  if (!(sigma >= 0.0)) throw std::domain_error("inverse_softplus: sigma < 0");
  if (sigma == 0.0) return -745.0;  // softplus underflows to exactly 0
  if (sigma > 30.0) return sigma;
  return std::log(std::expm1(sigma));
}

double inverse_logistic(double y) {
  const double c = std::clamp(y, 1e-9, 1.0 - 1e-9);
  return std::log(c / (1.0 - c));
}

}  // namespace sdslab
