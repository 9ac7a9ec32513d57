// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sdslab/camera.hpp"
#include "sdslab/image.hpp"
#include "sdslab/voxel_field.hpp"

namespace sdslab {

// Sample placement along rays: n_samples stratified steps between the ray's
// box entry and exit. With jittered=false samples sit at stratum midpoints;
// otherwise the offset comes from a stateless hash of (seed, pixel, index)
// so forward and backward passes agree without storing positions.
struct RaySampling {
  int n_samples = 64;
  bool jittered = false;
  std::uint64_t jitter_seed = 0;
};

struct RenderOutput {
  Image color_image;        // white-background composited, HxWx3
  Image opacity_map;        // accumulated alpha per Eq. of the opacity sum
  Image normalized_opacity; // min-max normalized; degenerate maps -> zeros
  Image depth_map;          // expected termination distance
  Image depth_variance;     // along-ray variance of termination
};

// Per-camera precomputed rays and box spans; building this once per camera
// keeps the per-iteration render loops tight.
struct CameraRays {
  int image_size = 0;
  std::vector<Ray> rays;
  std::vector<double> tnear, tfar;  // tfar <= tnear means "misses the box"
};

CameraRays build_camera_rays(const Camera& cam, double extent);

struct RayMarchResult {
  std::vector<double> weights;  // per-sample w_i
  double opacity = 0.0;
  Vec3 color{0, 0, 0};  // accumulated (no background term)
  double depth_mean = 0.0;
  double depth_var = 0.0;
  double transmittance = 1.0;  // T_{n+1}
};

// Single-ray version of the volumetric compositing sum; midpoint sampling.
// Throws std::domain_error for non-normalized directions.
RayMarchResult march_ray(const VoxelField& field, const Vec3& origin,
                         const Vec3& direction, int n_samples);

RenderOutput render_view(const VoxelField& field, const Camera& cam,
                         const RaySampling& sampling);
RenderOutput render_view(const VoxelField& field, const CameraRays& rays,
                         const RaySampling& sampling);

// Upstream adjoints for the full render. Empty images mean "no adjoint".
struct RenderAdjoint {
  Image d_color;      // HxWx3
  Image d_opacity;    // HxW
  Image d_depth_mean; // HxW
  Image d_depth_var;  // HxW
};

// Per-sample state retained by a forward render so the backward pass can run
// without re-marching or re-gathering: compositing state, the interpolation
// footprint, and the interpolated colors.
struct RenderTapeSample {
  double t, delta, e, w, T_after;
  double c[3];   // interpolated color at the sample
  std::int32_t base;
  double tw[8];  // trilinear corner weights
};

struct RenderTape {
  int image_size = 0;
  std::array<std::int32_t, 8> cell_offsets{};
  std::vector<RenderTapeSample> samples;   // in-grid samples, ray-major
  std::vector<std::uint32_t> ray_offset;   // npix + 1
  std::vector<double> opacity, m1, m2, T_final;  // per ray
};

// Forward render that also fills the tape (identical arithmetic to
// render_view).
RenderOutput render_view_taped(const VoxelField& field, const CameraRays& rays,
                               const RaySampling& sampling, RenderTape* tape);

// Backward pass over a taped forward render; accumulates into
// sigma/color-space gradients.
void render_tape_adjoint(const VoxelField& field, const RenderTape& tape,
                         const RenderAdjoint& adjoint, double* d_sigma,
                         double* d_col_r, double* d_col_g, double* d_col_b);

// Opacity-only forward pass (one exp per ray instead of one per sample);
// agrees with render_view's opacity_map to floating-point roundoff.
Image render_opacity(const VoxelField& field, const CameraRays& rays,
                     const RaySampling& sampling);

// Precomputed interpolation footprint for fixed (midpoint) sampling: the
// sample step is folded into the corner weights, so the opacity forward is a
// chain of 8-point dots and the backward a chain of 8-point scatters.
struct OpacityTapeSample {
  std::int32_t base;
  double w[8];  // corner weight times sample step
};

struct OpacityTape {
  int image_size = 0;
  std::array<std::int32_t, 8> cell_offsets{};
  std::vector<OpacityTapeSample> samples;
  std::vector<std::uint32_t> ray_offset;  // npix + 1
};

OpacityTape build_opacity_tape(const VoxelField& field, const CameraRays& rays,
                               int n_samples);
Image opacity_from_tape(const VoxelField& field, const OpacityTape& tape);
void opacity_tape_adjoint(const OpacityTape& tape, const Image& d_opacity,
                          const Image& opacity, double* d_sigma);

// Exact reverse-mode gradient of the requested outputs with respect to the
// raw density/color parameters.
FieldGradient render_gradients(const VoxelField& field, const Camera& cam,
                               const RaySampling& sampling,
                               const RenderAdjoint& adjoint);

// Generic (jitter-capable) opacity backward; the tape variants below are the
// fast path for fixed sampling.
void accumulate_opacity_adjoint(const VoxelField& field, const CameraRays& rays,
                                const RaySampling& sampling,
                                const Image& d_opacity, const Image& opacity,
                                double* d_sigma);

void apply_raw_chain(const VoxelField& field, const double* d_sigma,
                     const double* d_col_r, const double* d_col_g,
                     const double* d_col_b, FieldGradient* out);

// Min-max normalization with a floored denominator: maps with a healthy
// range get the exact (O - min)/(max - min); near-empty or near-constant
// maps fade linearly to zero instead of amplifying noise to full scale
// (constant maps come out all-zero).
struct NormalizeInfo {
  double min = 0.0, max = 0.0;
  double denom = 1.0;  // max(max - min, floor)
  std::size_t argmin = 0, argmax = 0;
  bool floored = false;
};
Image normalize_opacity(const Image& opacity, NormalizeInfo* info = nullptr);

// Adjoint of normalize_opacity (includes the min/max pixel terms).
Image normalize_opacity_adjoint(const Image& opacity, const NormalizeInfo& info,
                                const Image& d_normalized);

// Normal-map style shading of the density isosurface at the expected
// termination depth; background pixels render white.
Image surface_normal_image(const VoxelField& field, const Camera& cam,
                           const RaySampling& sampling);

}  // namespace sdslab
