// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "sdslab/vec3.hpp"

namespace sdslab {

// Dense voxel grid over [-extent, extent]^3 with values at grid vertices and
// trilinear interpolation in between. Density is softplus(raw) >= 0 and
// colors are logistic(raw) in [0,1]; the transformed grids are cached and
// refreshed after parameter updates so the render inner loops never pay a
// transcendental per sample.
class VoxelField {
 public:
  VoxelField(int resolution, double extent);

  int resolution() const { return res_; }
  double extent() const { return extent_; }
  std::size_t cells() const { return n_; }
  std::size_t param_count() const { return 4 * n_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(res_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(res_) * k);
  }

  // raw parameters (optimizer-facing), order: density, r, g, b
  std::vector<double>& raw_density() { return raw_density_; }
  std::vector<double>& raw_color(int c) { return raw_color_[c]; }
  const std::vector<double>& raw_density() const { return raw_density_; }
  const std::vector<double>& raw_color(int c) const { return raw_color_[c]; }

  // transformed caches
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<double>& color(int c) const { return color_[c]; }
  // per-cell chain factors d(sigma)/d(raw) and d(color)/d(raw)
  const std::vector<double>& sigma_deriv() const { return sigma_deriv_; }
  const std::vector<double>& color_deriv(int c) const { return color_deriv_[c]; }

  // Recompute the transformed grids from the raw parameters.
  void refresh();

  // Trilinear interpolation of the cached density at a world point; points
  // outside the grid evaluate to zero.
  double sigma_at(const Vec3& p) const;
  // Central-difference density gradient (for surface-normal snapshots).
  Vec3 sigma_gradient(const Vec3& p) const;

  double cell_spacing() const { return 2.0 * extent_ / (res_ - 1); }

  // Low uniform density inside a centered sphere (the standard spherical
  // initialization SDS methods start from), effectively empty outside.
  static VoxelField sphere_init(int resolution, double extent,
                                double inside_density = 0.01,
                                double radius_fraction = 0.8);

  // Snapshot with magic "SDSLAB-FIELD", resolution and extent as 32-bit LE
  // fields, then sigma and r,g,b grids as 32-bit floats.
  void save(const std::filesystem::path& path) const;

 private:
  int res_;
  double extent_;
  std::size_t n_;
  std::vector<double> raw_density_;
  std::vector<double> raw_color_[3];
  std::vector<double> sigma_;
  std::vector<double> color_[3];
  std::vector<double> sigma_deriv_;
  std::vector<double> color_deriv_[3];
};

// Gradient of a scalar objective with respect to the raw field parameters.
struct FieldGradient {
  std::vector<double> d_raw_density;
  std::vector<double> d_raw_color[3];

  explicit FieldGradient(std::size_t cells = 0)
      : d_raw_density(cells, 0.0),
        d_raw_color{std::vector<double>(cells, 0.0),
                    std::vector<double>(cells, 0.0),
                    std::vector<double>(cells, 0.0)} {}

  void clear();
  void add_scaled(const FieldGradient& other, double scale);
  bool finite() const;
};

// softplus^{-1}: raw value whose softplus equals sigma
double inverse_softplus(double sigma);
// logistic^{-1} with clamping away from {0,1}
double inverse_logistic(double y);

}  // namespace sdslab
