// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"

namespace sdslab {

namespace {

constexpr int kMaxSamples = 512;
constexpr double kEmptyA = 1e-17;   // exp(-a) rounds to 1.0 below this
constexpr double kEarlyT = 1e-14;   // stop marching once T drops below
constexpr double kDepthEps = 1e-8;   // guards depth normalization (eps_div)
constexpr double kRangeFloor = 5e-2; // denominator floor for normalization

struct TriLin {
  std::size_t base;
  double w[8];
};

inline std::array<std::int32_t, 8> grid_offsets(int res) {
  const std::int32_t sy = res;
  const std::int32_t sz = res * res;
  return {0, 1, sy, sy + 1, sz, sz + 1, sy + sz, sy + sz + 1};
}

inline bool trilin_setup(const VoxelField& f, const Vec3& p, TriLin* out) {
  const int res = f.resolution();
  const double s = (res - 1) / (2.0 * f.extent());
  double fx = (p.x + f.extent()) * s;
  double fy = (p.y + f.extent()) * s;
  double fz = (p.z + f.extent()) * s;
  if (fx < -1e-9 || fy < -1e-9 || fz < -1e-9 || fx > res - 1 + 1e-9 ||
      fy > res - 1 + 1e-9 || fz > res - 1 + 1e-9)
    return false;
  fx = std::clamp(fx, 0.0, static_cast<double>(res - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(res - 1));
  fz = std::clamp(fz, 0.0, static_cast<double>(res - 1));
  const int i = std::min(static_cast<int>(fx), res - 2);
  const int j = std::min(static_cast<int>(fy), res - 2);
  const int k = std::min(static_cast<int>(fz), res - 2);
  const double ux = fx - i, uy = fy - j, uz = fz - k;
  out->base = f.index(i, j, k);
  const double mx = 1.0 - ux, my = 1.0 - uy, mz = 1.0 - uz;
  out->w[0] = mx * my * mz;
  out->w[1] = ux * my * mz;
  out->w[2] = mx * uy * mz;
  out->w[3] = ux * uy * mz;
  out->w[4] = mx * my * uz;
  out->w[5] = ux * my * uz;
  out->w[6] = mx * uy * uz;
  out->w[7] = ux * uy * uz;
  return true;
}

inline double gather(const double* grid, std::size_t base,
                     const std::int32_t* off, const double* w) {
  double acc = 0.0;
  for (int m = 0; m < 8; ++m) acc += grid[base + off[m]] * w[m];
  return acc;
}

inline void scatter(double* grid, std::size_t base, const std::int32_t* off,
                    const double* w, double v) {
  for (int m = 0; m < 8; ++m) grid[base + off[m]] += v * w[m];
}

struct BoxSpan {
  double tnear = 0.0, tfar = -1.0;
};

BoxSpan intersect_box(const Ray& r, double extent) {
  double t0 = 1e-9, t1 = std::numeric_limits<double>::infinity();
  const double o[3] = {r.origin.x, r.origin.y, r.origin.z};
  const double d[3] = {r.dir.x, r.dir.y, r.dir.z};
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < -extent || o[a] > extent) return {};
      continue;
    }
    double ta = (-extent - o[a]) / d[a];
    double tb = (extent - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 <= t0) return {};
  return {t0, t1};
}

// One sample per stratum of width h; delta_i is the stratum width so the
// optical depth integrates the full [tnear, tfar] span regardless of jitter.
void place_samples(double tnear, double tfar, const RaySampling& sampling,
                   int px, int py, double* ts, double* deltas) {
  const int n = sampling.n_samples;
  const double h = (tfar - tnear) / n;
  if (sampling.jittered) {
    for (int i = 0; i < n; ++i)
      ts[i] = tnear + (i + jitter_value(sampling.jitter_seed, px, py, i)) * h;
  } else {
    for (int i = 0; i < n; ++i) ts[i] = tnear + (i + 0.5) * h;
  }
  for (int i = 0; i < n; ++i) deltas[i] = h;
}

struct RayForward {
  double opacity = 0.0;
  double m1 = 0.0, m2 = 0.0;
  double color[3] = {0, 0, 0};
  double T_final = 1.0;
};

// Single forward march in two passes: density interpolation (then one batched
// exp over the ray), then compositing. Appends in-grid samples to the tape
// when given; the same code path serves the plain and the taped render so
// both produce bit-identical outputs.
RayForward march_forward(const VoxelField& field, const Ray& ray, double tnear,
                         double tfar, const RaySampling& sampling, int px,
                         int py, bool want_color, RenderTape* tape,
                         double* weights_out = nullptr) {
  RayForward out;
  if (!(tfar > tnear)) return out;
  const int n = sampling.n_samples;
  double ts[kMaxSamples], deltas[kMaxSamples];
  place_samples(tnear, tfar, sampling, px, py, ts, deltas);

  const auto off = grid_offsets(field.resolution());
  const double* sig = field.sigma().data();
  const double* col[3] = {field.color(0).data(), field.color(1).data(),
                          field.color(2).data()};

  TriLin tri[kMaxSamples];
  bool inside[kMaxSamples];
  double neg_a[kMaxSamples], e_arr[kMaxSamples];
  for (int i = 0; i < n; ++i) {
    const Vec3 p = ray.origin + ts[i] * ray.dir;
    inside[i] = trilin_setup(field, p, &tri[i]);
    double a = 0.0;
    if (inside[i])
      a = gather(sig, tri[i].base, off.data(), tri[i].w) * deltas[i];
    neg_a[i] = -a;
  }
  kernels::active().exp_array(neg_a, e_arr, static_cast<std::size_t>(n));

  double T = 1.0;
  for (int i = 0; i < n; ++i) {
    double e = 1.0, w = 0.0;
    double c[3] = {0, 0, 0};
    const bool occupied = -neg_a[i] > kEmptyA;
    if (inside[i] && want_color && (occupied || tape)) {
      c[0] = gather(col[0], tri[i].base, off.data(), tri[i].w);
      c[1] = gather(col[1], tri[i].base, off.data(), tri[i].w);
      c[2] = gather(col[2], tri[i].base, off.data(), tri[i].w);
    }
    if (occupied) {
      e = e_arr[i];
      w = T * (1.0 - e);
      if (want_color) {
        out.color[0] += w * c[0];
        out.color[1] += w * c[1];
        out.color[2] += w * c[2];
      }
      out.opacity += w;
      out.m1 += w * ts[i];
      out.m2 += w * ts[i] * ts[i];
      T *= e;
    }
    if (weights_out) weights_out[i] = w;
    if (tape && inside[i]) {
      RenderTapeSample s;
      s.t = ts[i];
      s.delta = deltas[i];
      s.e = e;
      s.w = w;
      s.T_after = T;
      s.c[0] = c[0];
      s.c[1] = c[1];
      s.c[2] = c[2];
      s.base = static_cast<std::int32_t>(tri[i].base);
      for (int m = 0; m < 8; ++m) s.tw[m] = tri[i].w[m];
      tape->samples.push_back(s);
    }
    if (T < kEarlyT) break;
  }
  out.T_final = T;
  return out;
}

RenderOutput render_common(const VoxelField& field, const CameraRays& rays,
                           const RaySampling& sampling, RenderTape* tape) {
  if (sampling.n_samples < 2 || sampling.n_samples > kMaxSamples)
    throw std::invalid_argument("render: n_samples outside [2, 512]");
  const int size = rays.image_size;
  const std::size_t npix = static_cast<std::size_t>(size) * size;
  RenderOutput out;
  out.color_image = Image(size, size, 3);
  out.opacity_map = Image(size, size, 1);
  out.depth_map = Image(size, size, 1);
  out.depth_variance = Image(size, size, 1);
  if (tape) {
    tape->image_size = size;
    tape->cell_offsets = grid_offsets(field.resolution());
    tape->samples.clear();
    tape->samples.reserve(npix * sampling.n_samples / 2);
    tape->ray_offset.assign(npix + 1, 0);
    tape->opacity.assign(npix, 0.0);
    tape->m1.assign(npix, 0.0);
    tape->m2.assign(npix, 0.0);
    tape->T_final.assign(npix, 1.0);
  }
  for (int py = 0; py < size; ++py)
    for (int px = 0; px < size; ++px) {
      const std::size_t idx = static_cast<std::size_t>(py) * size + px;
      const RayForward fwd =
          march_forward(field, rays.rays[idx], rays.tnear[idx], rays.tfar[idx],
                        sampling, px, py, true, tape);
      for (int c = 0; c < 3; ++c)
        out.color_image.values[idx * 3 + c] = fwd.color[c] + fwd.T_final;
      out.opacity_map.values[idx] = fwd.opacity;
      const double safe = std::max(fwd.opacity, kDepthEps);
      const double mean = fwd.m1 / safe;
      out.depth_map.values[idx] = mean;
      out.depth_variance.values[idx] =
          std::max(0.0, fwd.m2 / safe - mean * mean);
      if (tape) {
        tape->ray_offset[idx + 1] =
            static_cast<std::uint32_t>(tape->samples.size());
        tape->opacity[idx] = fwd.opacity;
        tape->m1[idx] = fwd.m1;
        tape->m2[idx] = fwd.m2;
        tape->T_final[idx] = fwd.T_final;
      }
    }
  out.normalized_opacity = normalize_opacity(out.opacity_map);
  return out;
}

}  // namespace

CameraRays build_camera_rays(const Camera& cam, double extent) {
  cam.validate();
  CameraRays out;
  out.image_size = cam.image_size;
  const std::size_t n =
      static_cast<std::size_t>(cam.image_size) * cam.image_size;
  out.rays.resize(n);
  out.tnear.resize(n);
  out.tfar.resize(n);
  for (int py = 0; py < cam.image_size; ++py)
    for (int px = 0; px < cam.image_size; ++px) {
      const std::size_t idx =
          static_cast<std::size_t>(py) * cam.image_size + px;
      out.rays[idx] = cam.pixel_ray(px, py);
      const BoxSpan span = intersect_box(out.rays[idx], extent);
      out.tnear[idx] = span.tnear;
      out.tfar[idx] = span.tfar;
    }
  return out;
}

RayMarchResult march_ray(const VoxelField& field, const Vec3& origin,
                         const Vec3& direction, int n_samples) {
  if (std::abs(norm(direction) - 1.0) > 1e-9)
    throw std::domain_error("march_ray: direction must be unit length");
  if (n_samples < 2 || n_samples > kMaxSamples)
    throw std::invalid_argument("march_ray: n_samples outside [2, 512]");
  const Ray ray{origin, direction};
  const BoxSpan span = intersect_box(ray, field.extent());
  RayMarchResult out;
  out.weights.assign(n_samples, 0.0);
  if (!(span.tfar > span.tnear)) return out;
  RaySampling sampling;
  sampling.n_samples = n_samples;
  const RayForward fwd =
      march_forward(field, ray, span.tnear, span.tfar, sampling, 0, 0, true,
                    nullptr, out.weights.data());
  out.opacity = fwd.opacity;
  out.color = {fwd.color[0], fwd.color[1], fwd.color[2]};
  const double safe = std::max(fwd.opacity, kDepthEps);
  out.depth_mean = fwd.m1 / safe;
  out.depth_var =
      std::max(0.0, fwd.m2 / safe - out.depth_mean * out.depth_mean);
  out.transmittance = fwd.T_final;
  return out;
}

Image normalize_opacity(const Image& opacity, NormalizeInfo* info) {
  NormalizeInfo local;
  const std::size_t n = opacity.values.size();
  double mn, mx;
  kernels::active().min_max(opacity.values.data(), n, &mn, &mx);
  local.min = mn;
  local.max = mx;
  for (std::size_t i = 0; i < n; ++i) {
    if (opacity.values[i] == mn) {
      local.argmin = i;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (opacity.values[i] == mx) {
      local.argmax = i;
      break;
    }
  }
  local.floored = (mx - mn) < kRangeFloor;
  local.denom = std::max(mx - mn, kRangeFloor);
  Image out(opacity.width, opacity.height, 1);
  const double inv = 1.0 / local.denom;
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = (opacity.values[i] - mn) * inv;
  if (info) *info = local;
  return out;
}

Image normalize_opacity_adjoint(const Image& opacity, const NormalizeInfo& info,
                                const Image& d_normalized) {
  Image out(opacity.width, opacity.height, 1);
  const double inv = 1.0 / info.denom;
  double sum_d = 0.0, sum_d_o = 0.0;
  const std::size_t n = opacity.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    sum_d += d_normalized.values[i];
    sum_d_o += d_normalized.values[i] * opacity.values[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = d_normalized.values[i] * inv;
  if (info.floored) {
    // n_p = (O_p - min)/floor: only the min pixel carries an extra term
    out.values[info.argmin] -= sum_d * inv;
  } else {
    // d/d(min): sum_p d_p * (O_p - max) / range^2
    out.values[info.argmin] += (sum_d_o - info.max * sum_d) * inv * inv;
    // d/d(max): sum_p d_p * (min - O_p) / range^2
    out.values[info.argmax] += (info.min * sum_d - sum_d_o) * inv * inv;
  }
  return out;
}

RenderOutput render_view(const VoxelField& field, const Camera& cam,
                         const RaySampling& sampling) {
  return render_view(field, build_camera_rays(cam, field.extent()), sampling);
}

RenderOutput render_view(const VoxelField& field, const CameraRays& rays,
                         const RaySampling& sampling) {
  return render_common(field, rays, sampling, nullptr);
}

RenderOutput render_view_taped(const VoxelField& field, const CameraRays& rays,
                               const RaySampling& sampling, RenderTape* tape) {
  return render_common(field, rays, sampling, tape);
}

void render_tape_adjoint(const VoxelField& field, const RenderTape& tape,
                         const RenderAdjoint& adjoint, double* d_sigma,
                         double* d_col_r, double* d_col_g, double* d_col_b) {
  const int size = tape.image_size;
  const std::size_t npix = static_cast<std::size_t>(size) * size;
  const bool has_color = !adjoint.d_color.values.empty();
  const bool has_opacity = !adjoint.d_opacity.values.empty();
  const bool has_mean = !adjoint.d_depth_mean.values.empty();
  const bool has_var = !adjoint.d_depth_var.values.empty();
  (void)field;
  double* d_col[3] = {d_col_r, d_col_g, d_col_b};
  const std::int32_t* off = tape.cell_offsets.data();

  for (std::size_t idx = 0; idx < npix; ++idx) {
    double dC[3] = {0, 0, 0};
    if (has_color)
      for (int c = 0; c < 3; ++c) dC[c] = adjoint.d_color.values[idx * 3 + c];
    const double dO_up = has_opacity ? adjoint.d_opacity.values[idx] : 0.0;
    const double dmean_up = has_mean ? adjoint.d_depth_mean.values[idx] : 0.0;
    const double dvar_up = has_var ? adjoint.d_depth_var.values[idx] : 0.0;
    if (dC[0] == 0 && dC[1] == 0 && dC[2] == 0 && dO_up == 0 &&
        dmean_up == 0 && dvar_up == 0)
      continue;

    const double O = tape.opacity[idx];
    const double safe = std::max(O, kDepthEps);
    const double mean = tape.m1[idx] / safe;
    const double var_raw = tape.m2[idx] / safe - mean * mean;
    const double dvar = (var_raw > 0.0) ? dvar_up : 0.0;
    const double dM2 = dvar / safe;
    const double dmean = dmean_up - 2.0 * mean * dvar;
    const double dM1 = dmean / safe;
    double dO = dO_up;
    if (O > kDepthEps)
      dO += dvar * (-tape.m2[idx] / (safe * safe)) + dmean * (-mean / safe);
    const double dTn = dC[0] + dC[1] + dC[2];  // white background term
    const bool want_color = dC[0] != 0.0 || dC[1] != 0.0 || dC[2] != 0.0;

    // suffix accumulator: S_k = dTn * T_n + sum_{i>k} adj_w_i * w_i
    double S = dTn * tape.T_final[idx];
    const std::uint32_t begin = tape.ray_offset[idx];
    const std::uint32_t end = tape.ray_offset[idx + 1];
    for (std::uint32_t k = end; k-- > begin;) {
      const RenderTapeSample& s = tape.samples[k];
      double adj_w = dO + dM1 * s.t + dM2 * s.t * s.t;
      if (want_color) {
        for (int c = 0; c < 3; ++c) {
          if (dC[c] == 0.0) continue;
          adj_w += dC[c] * s.c[c];
          if (s.w != 0.0) scatter(d_col[c], s.base, off, s.tw, dC[c] * s.w);
        }
      }
      const double adj_a = adj_w * s.T_after - S;
      S += adj_w * s.w;
      const double d_sig_sample = adj_a * s.delta;
      if (d_sig_sample != 0.0)
        scatter(d_sigma, s.base, off, s.tw, d_sig_sample);
    }
  }
}

Image render_opacity(const VoxelField& field, const CameraRays& rays,
                     const RaySampling& sampling) {
  if (sampling.n_samples < 2 || sampling.n_samples > kMaxSamples)
    throw std::invalid_argument("render_opacity: n_samples outside [2, 512]");
  const int size = rays.image_size;
  Image out(size, size, 1);
  const auto off = grid_offsets(field.resolution());
  const double* sig = field.sigma().data();
  double ts[kMaxSamples], deltas[kMaxSamples];
  TriLin tri;
  for (int py = 0; py < size; ++py)
    for (int px = 0; px < size; ++px) {
      const std::size_t idx = static_cast<std::size_t>(py) * size + px;
      const double tnear = rays.tnear[idx], tfar = rays.tfar[idx];
      if (!(tfar > tnear)) continue;
      place_samples(tnear, tfar, sampling, px, py, ts, deltas);
      const Ray& ray = rays.rays[idx];
      double a_total = 0.0;
      for (int i = 0; i < sampling.n_samples; ++i) {
        const Vec3 p = ray.origin + ts[i] * ray.dir;
        if (trilin_setup(field, p, &tri))
          a_total += gather(sig, tri.base, off.data(), tri.w) * deltas[i];
      }
      out.values[idx] = -std::expm1(-a_total);
    }
  return out;
}

void accumulate_opacity_adjoint(const VoxelField& field, const CameraRays& rays,
                                const RaySampling& sampling,
                                const Image& d_opacity, const Image& opacity,
                                double* d_sigma) {
  const int size = rays.image_size;
  const auto off = grid_offsets(field.resolution());
  double ts[kMaxSamples], deltas[kMaxSamples];
  TriLin tri;
  for (int py = 0; py < size; ++py)
    for (int px = 0; px < size; ++px) {
      const std::size_t idx = static_cast<std::size_t>(py) * size + px;
      const double adj = d_opacity.values[idx];
      if (adj == 0.0) continue;
      const double tnear = rays.tnear[idx], tfar = rays.tfar[idx];
      if (!(tfar > tnear)) continue;
      // dO/da_i = T_final = 1 - O for every sample along the ray
      const double factor = adj * (1.0 - opacity.values[idx]);
      if (factor == 0.0) continue;
      place_samples(tnear, tfar, sampling, px, py, ts, deltas);
      const Ray& ray = rays.rays[idx];
      for (int i = 0; i < sampling.n_samples; ++i) {
        const Vec3 p = ray.origin + ts[i] * ray.dir;
        if (trilin_setup(field, p, &tri))
          scatter(d_sigma, tri.base, off.data(), tri.w, factor * deltas[i]);
      }
    }
}

OpacityTape build_opacity_tape(const VoxelField& field, const CameraRays& rays,
                               int n_samples) {
  if (n_samples < 2 || n_samples > kMaxSamples)
    throw std::invalid_argument("opacity tape: n_samples outside [2, 512]");
  OpacityTape tape;
  tape.image_size = rays.image_size;
  tape.cell_offsets = grid_offsets(field.resolution());
  const std::size_t npix =
      static_cast<std::size_t>(rays.image_size) * rays.image_size;
  tape.ray_offset.assign(npix + 1, 0);
  const RaySampling sampling{n_samples, false, 0};
  double ts[kMaxSamples], deltas[kMaxSamples];
  TriLin tri;
  for (std::size_t idx = 0; idx < npix; ++idx) {
    const double tnear = rays.tnear[idx], tfar = rays.tfar[idx];
    if (tfar > tnear) {
      place_samples(tnear, tfar, sampling, 0, 0, ts, deltas);
      const Ray& ray = rays.rays[idx];
      for (int i = 0; i < n_samples; ++i) {
        const Vec3 p = ray.origin + ts[i] * ray.dir;
        if (!trilin_setup(field, p, &tri)) continue;
        OpacityTapeSample s;
        s.base = static_cast<std::int32_t>(tri.base);
        for (int m = 0; m < 8; ++m) s.w[m] = tri.w[m] * deltas[i];
        tape.samples.push_back(s);
      }
    }
    tape.ray_offset[idx + 1] = static_cast<std::uint32_t>(tape.samples.size());
  }
  return tape;
}

Image opacity_from_tape(const VoxelField& field, const OpacityTape& tape) {
  const int size = tape.image_size;
  Image out(size, size, 1);
  const double* sig = field.sigma().data();
  const std::int32_t* off = tape.cell_offsets.data();
  const std::size_t npix = static_cast<std::size_t>(size) * size;
  for (std::size_t idx = 0; idx < npix; ++idx) {
    double a_total = 0.0;
    for (std::uint32_t k = tape.ray_offset[idx]; k < tape.ray_offset[idx + 1];
         ++k) {
      const OpacityTapeSample& s = tape.samples[k];
      a_total += gather(sig, s.base, off, s.w);
    }
    out.values[idx] = -std::expm1(-a_total);
  }
  return out;
}

void opacity_tape_adjoint(const OpacityTape& tape, const Image& d_opacity,
                          const Image& opacity, double* d_sigma) {
  const std::int32_t* off = tape.cell_offsets.data();
  const std::size_t npix =
      static_cast<std::size_t>(tape.image_size) * tape.image_size;
  for (std::size_t idx = 0; idx < npix; ++idx) {
    const double adj = d_opacity.values[idx];
    if (adj == 0.0) continue;
    const double factor = adj * (1.0 - opacity.values[idx]);
    if (factor == 0.0) continue;
    for (std::uint32_t k = tape.ray_offset[idx]; k < tape.ray_offset[idx + 1];
         ++k) {
      const OpacityTapeSample& s = tape.samples[k];
      scatter(d_sigma, s.base, off, s.w, factor);
    }
  }
}

void apply_raw_chain(const VoxelField& field, const double* d_sigma,
                     const double* d_col_r, const double* d_col_g,
                     const double* d_col_b, FieldGradient* out) {
  const std::size_t n = field.cells();
  const double* sd = field.sigma_deriv().data();
  for (std::size_t i = 0; i < n; ++i)
    out->d_raw_density[i] += d_sigma[i] * sd[i];
  const double* cd[3] = {field.color_deriv(0).data(),
                         field.color_deriv(1).data(),
                         field.color_deriv(2).data()};
  const double* dc[3] = {d_col_r, d_col_g, d_col_b};
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i)
      out->d_raw_color[c][i] += dc[c][i] * cd[c][i];
}

FieldGradient render_gradients(const VoxelField& field, const Camera& cam,
                               const RaySampling& sampling,
                               const RenderAdjoint& adjoint) {
  const CameraRays rays = build_camera_rays(cam, field.extent());
  auto check = [&](const Image& img, int channels, const char* name) {
    if (img.values.empty()) return;
    if (img.width != cam.image_size || img.height != cam.image_size ||
        img.channels != channels)
      throw std::invalid_argument(std::string("render_gradients: adjoint ") +
                                  name + " shape mismatch");
  };
  check(adjoint.d_color, 3, "d_color");
  check(adjoint.d_opacity, 1, "d_opacity");
  check(adjoint.d_depth_mean, 1, "d_depth_mean");
  check(adjoint.d_depth_var, 1, "d_depth_var");

  RenderTape tape;
  render_view_taped(field, rays, sampling, &tape);
  const std::size_t n = field.cells();
  std::vector<double> d_sigma(n, 0.0), d_r(n, 0.0), d_g(n, 0.0), d_b(n, 0.0);
  render_tape_adjoint(field, tape, adjoint, d_sigma.data(), d_r.data(),
                      d_g.data(), d_b.data());
  FieldGradient grad(n);
  apply_raw_chain(field, d_sigma.data(), d_r.data(), d_g.data(), d_b.data(),
                  &grad);
  return grad;
}

Image surface_normal_image(const VoxelField& field, const Camera& cam,
                           const RaySampling& sampling) {
  const RenderOutput out = render_view(field, cam, sampling);
  const int size = cam.image_size;
  Image img(size, size, 3);
  for (int py = 0; py < size; ++py)
    for (int px = 0; px < size; ++px) {
      const std::size_t idx = static_cast<std::size_t>(py) * size + px;
      if (out.opacity_map.values[idx] > 0.5) {
        const Ray ray = cam.pixel_ray(px, py);
        const Vec3 p = ray.origin + out.depth_map.values[idx] * ray.dir;
        const Vec3 n = normalized(-1.0 * field.sigma_gradient(p));
        img.values[idx * 3 + 0] = 0.5 + 0.5 * n.x;
        img.values[idx * 3 + 1] = 0.5 + 0.5 * n.y;
        img.values[idx * 3 + 2] = 0.5 + 0.5 * n.z;
      } else {
        img.values[idx * 3 + 0] = 1.0;
        img.values[idx * 3 + 1] = 1.0;
        img.values[idx * 3 + 2] = 1.0;
      }
    }
  return img;
}

}  // namespace sdslab
