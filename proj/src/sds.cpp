// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/sds.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "sdslab/image.hpp"
#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"

namespace sdslab {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void check_finite(double v, int iter, const char* component) {
  if (!std::isfinite(v)) throw DivergenceError(iter, component);
}

}  // namespace

std::string StageReport::csv(bool record_timing) const {
  std::ostringstream out;
  out << "iter,t,lambda_chs,loss_sds,loss_chs,loss_img,loss_zvar,loss_total,"
         "seconds\n";
  for (const auto& r : rows) {
    out << r.iter << "," << r.t << "," << format_double(r.lambda_chs) << ","
        << format_double(r.loss_sds) << "," << format_double(r.loss_chs) << ","
        << format_double(r.loss_img) << "," << format_double(r.loss_zvar)
        << "," << format_double(r.loss_total) << ","
        << format_double(record_timing ? r.seconds : 0.0) << "\n";
  }
  return out.str();
}

void StageReport::write_csv(const std::filesystem::path& path,
                            bool record_timing) const {
  write_file_atomic(path, csv(record_timing));
}

double silhouette_mse(const VoxelField& field, const SdsContext& ctx) {
  RaySampling sampling{ctx.ray_samples, false, 0};
  double total = 0.0;
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v) {
    const Image opacity = render_opacity(field, ctx.cam_rays[v], sampling);
    const Image normalized = normalize_opacity(opacity);
    double acc = 0.0;
    for (std::size_t p = 0; p < normalized.values.size(); ++p) {
      const double d = normalized.values[p] - ctx.masks[v].values[p];
      acc += d * d;
    }
    total += acc / static_cast<double>(normalized.values.size());
  }
  return total / static_cast<double>(ctx.cameras.size());
}

StageReport init_stage(VoxelField& field, const SdsContext& ctx, int iters,
                       const AdamParams& adam, Rng& rng, bool record_timing) {
  if (iters < 1) throw std::invalid_argument("init_stage: iters must be >= 1");
  if (ctx.cameras.empty())
    throw std::invalid_argument("init_stage: empty camera list");
  (void)rng;  // silhouette fitting uses fixed midpoint sampling
  StageReport report;
  report.rows.reserve(iters);
  AdamOptimizer opt(field.cells(), adam);
  const std::size_t cells = field.cells();
  std::vector<double> d_sigma(cells, 0.0);
  std::vector<double> zeros(cells, 0.0);
  FieldGradient grad(cells);
  const double inv_views = 1.0 / static_cast<double>(ctx.cameras.size());

  std::vector<OpacityTape> tapes;
  tapes.reserve(ctx.cameras.size());
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v)
    tapes.push_back(
        build_opacity_tape(field, ctx.cam_rays[v], ctx.ray_samples));

  for (int i = 0; i < iters; ++i) {
    const double t0 = record_timing ? now_seconds() : 0.0;
    std::fill(d_sigma.begin(), d_sigma.end(), 0.0);
    double loss = 0.0;
    for (std::size_t v = 0; v < ctx.cameras.size(); ++v) {
      const Image opacity = opacity_from_tape(field, tapes[v]);
      NormalizeInfo info;
      const Image normalized = normalize_opacity(opacity, &info);
      const std::size_t npix = normalized.values.size();
      Image d_norm(normalized.width, normalized.height, 1);
      double acc = 0.0;
      for (std::size_t p = 0; p < npix; ++p) {
        const double d = normalized.values[p] - ctx.masks[v].values[p];
        acc += d * d;
        d_norm.values[p] = 2.0 * d * inv_views / static_cast<double>(npix);
      }
      loss += acc * inv_views / static_cast<double>(npix);
      const Image d_opacity = normalize_opacity_adjoint(opacity, info, d_norm);
      opacity_tape_adjoint(tapes[v], d_opacity, opacity, d_sigma.data());
    }
    check_finite(loss, i, "init loss");
    grad.clear();
    apply_raw_chain(field, d_sigma.data(), zeros.data(), zeros.data(),
                    zeros.data(), &grad);
    if (!grad.finite()) throw DivergenceError(i, "init gradient");
    opt.step(field, grad);

    IterationRecord rec;
    rec.iter = i;
    rec.loss_total = loss;
    rec.seconds = record_timing ? now_seconds() - t0 : 0.0;
    report.rows.push_back(rec);
  }
  return report;
}

double chs_loss_accumulate(const VoxelField& field, const SdsContext& ctx,
                           double lambda, const RaySampling& sampling,
                           double* d_sigma) {
  if (ctx.cameras.empty())
    throw std::invalid_argument("chs_loss: empty camera list");
  const bool taped = !ctx.chs_tapes.empty();
  const double inv_views = 1.0 / static_cast<double>(ctx.cameras.size());
  double loss = 0.0;
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v) {
    const Image opacity =
        taped ? opacity_from_tape(field, ctx.chs_tapes[v])
              : render_opacity(field, ctx.chs_rays[v], sampling);
    NormalizeInfo info;
    const Image normalized = normalize_opacity(opacity, &info);
    const std::size_t npix = normalized.values.size();
    double acc = 0.0;
    for (std::size_t p = 0; p < npix; ++p) {
      const double d = normalized.values[p] - ctx.chs_masks[v].values[p];
      acc += d * d;
    }
    const double rms = std::sqrt(acc / static_cast<double>(npix));
    loss += lambda * rms * inv_views;
    if (d_sigma == nullptr || rms < 1e-15) continue;
    // d rms / d On_p = (On_p - M_p) / (npix * rms)
    const double scale = lambda * inv_views / (static_cast<double>(npix) * rms);
    Image d_norm(normalized.width, normalized.height, 1);
    for (std::size_t p = 0; p < npix; ++p)
      d_norm.values[p] =
          scale * (normalized.values[p] - ctx.chs_masks[v].values[p]);
    const Image d_opacity = normalize_opacity_adjoint(opacity, info, d_norm);
    if (taped)
      opacity_tape_adjoint(ctx.chs_tapes[v], d_opacity, opacity, d_sigma);
    else
      accumulate_opacity_adjoint(field, ctx.chs_rays[v], sampling, d_opacity,
                                 opacity, d_sigma);
  }
  return loss;
}

std::pair<double, FieldGradient> chs_loss(const VoxelField& field,
                                          const SdsContext& ctx, int t,
                                          const RaySampling& sampling) {
  const double lambda = ctx.plan.lambda_chs_at_t(t);
  std::vector<double> d_sigma(field.cells(), 0.0);
  const double loss =
      chs_loss_accumulate(field, ctx, lambda, sampling, d_sigma.data());
  FieldGradient grad(field.cells());
  std::vector<double> zeros(field.cells(), 0.0);
  apply_raw_chain(field, d_sigma.data(), zeros.data(), zeros.data(),
                  zeros.data(), &grad);
  return {loss, std::move(grad)};
}

std::pair<double, Image> img_loss(const Image& render_img,
                                  const Image& target) {
  if (render_img.values.size() != target.values.size())
    throw std::invalid_argument("img_loss: shape mismatch");
  const std::size_t n = render_img.values.size();
  Image d_image(render_img.width, render_img.height, render_img.channels);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = render_img.values[i] - target.values[i];
    acc += d * d;
    d_image.values[i] = 2.0 * d / static_cast<double>(n);
  }
  return {acc / static_cast<double>(n), std::move(d_image)};
}

std::pair<double, Image> zvar_loss(const RenderOutput& render) {
  const Image& var = render.depth_variance;
  Image d_var(var.width, var.height, 1);
  std::size_t fg = 0;
  double acc = 0.0;
  for (std::size_t p = 0; p < var.values.size(); ++p) {
    if (render.opacity_map.values[p] > 0.5) {
      ++fg;
      acc += var.values[p];
    }
  }
  if (fg == 0) return {0.0, std::move(d_var)};
  const double inv = 1.0 / static_cast<double>(fg);
  for (std::size_t p = 0; p < var.values.size(); ++p)
    if (render.opacity_map.values[p] > 0.5) d_var.values[p] = inv;
  return {acc * inv, std::move(d_var)};
}

SdsStepResult sds_step(const VoxelField& field, const SdsContext& ctx,
                       int camera_index, int i, Rng& rng,
                       const std::vector<double>* eps_override) {
  const RaySampling sampling{ctx.ray_samples, ctx.jitter, rng.next_u64()};
  const int t = ctx.plan.timestep_at(i);

  RenderTape tape;
  const RenderOutput render =
      render_view_taped(field, ctx.cam_rays[camera_index], sampling, &tape);
  const std::vector<double> z = ctx.codec.encode(render.color_image);
  std::vector<double> eps(z.size());
  if (eps_override) {
    if (eps_override->size() != z.size())
      throw std::invalid_argument("sds_step: eps_override dimension mismatch");
    eps = *eps_override;
  } else {
    rng.fill_gaussian(eps.data(), eps.size());
  }
  const std::vector<double> z_t = forward_noise(z, t, eps, *ctx.schedule);
  const std::vector<double> eps_hat =
      predict_noise(z_t, ctx.cam_modes[camera_index], t, *ctx.schedule);

  SdsStepResult out;
  out.t = t;
  out.latent_residual.resize(z.size());
  kernels::active().axpbyz(1.0, eps_hat.data(), -1.0, eps.data(),
                           out.latent_residual.data(), z.size());
  out.loss_sds =
      0.5 * kernels::active().sq_norm(out.latent_residual.data(), z.size());

  RenderAdjoint adjoint;
  adjoint.d_color = ctx.codec.encode_adjoint(out.latent_residual);
  const std::size_t n = field.cells();
  std::vector<double> d_sigma(n, 0.0), d_r(n, 0.0), d_g(n, 0.0), d_b(n, 0.0);
  render_tape_adjoint(field, tape, adjoint, d_sigma.data(), d_r.data(),
                      d_g.data(), d_b.data());
  out.grad = FieldGradient(n);
  apply_raw_chain(field, d_sigma.data(), d_r.data(), d_g.data(), d_b.data(),
                  &out.grad);
  return out;
}

StageReport optimize_stage2(VoxelField& field, const SdsContext& ctx,
                            const LossWeights& weights, const Toggles& toggles,
                            int iters, const AdamParams& adam, Rng& rng,
                            bool record_timing) {
  StageReport report;
  report.rows.reserve(iters);
  if (iters == 0) return report;
  AdamOptimizer opt(field.cells(), adam);
  const std::size_t cells = field.cells();
  const std::size_t dim = ctx.codec.latent_dim();
  const auto& ops = kernels::active();
  std::vector<double> d_sigma(cells), d_r(cells), d_g(cells), d_b(cells);
  std::vector<double> eps(dim), residual(dim), zhat0(dim);
  FieldGradient grad(cells);
  RenderTape tape;

  for (int i = 0; i < iters; ++i) {
    const double t0 = record_timing ? now_seconds() : 0.0;
    const int cam = static_cast<int>(i % ctx.cameras.size());
    const RaySampling sampling{ctx.ray_samples, ctx.jitter, rng.next_u64()};
    const int t = ctx.plan.timestep_at(i);
    const double lambda = ctx.plan.lambda_chs_at_iter(i);
    const double ab = ctx.schedule->alpha_bar(t);

    const RenderOutput render =
        render_view_taped(field, ctx.cam_rays[cam], sampling, &tape);
    const std::vector<double> z = ctx.codec.encode(render.color_image);
    rng.fill_gaussian(eps.data(), dim);
    const std::vector<double> z_t = forward_noise(z, t, eps, *ctx.schedule);
    const std::vector<double> eps_hat =
        predict_noise(z_t, ctx.cam_modes[cam], t, *ctx.schedule);
    ops.axpbyz(1.0, eps_hat.data(), -1.0, eps.data(), residual.data(), dim);

    IterationRecord rec;
    rec.iter = i;
    rec.t = t;
    rec.lambda_chs = lambda;
    rec.loss_sds = 0.5 * ops.sq_norm(residual.data(), dim);
    check_finite(rec.loss_sds, i, "loss_sds");

    // image-space target: decoded denoised latent estimate
    // zhat0 = (z_t - sqrt(1-ab) eps_hat) / sqrt(ab)
    ops.axpbyz(1.0 / std::sqrt(ab), z_t.data(),
               -std::sqrt(1.0 - ab) / std::sqrt(ab), eps_hat.data(),
               zhat0.data(), dim);
    const Image img_target = ctx.codec.decode(zhat0);
    auto [l_img, d_img] = img_loss(render.color_image, img_target);
    check_finite(l_img, i, "loss_img");
    auto [l_zvar, d_var] = zvar_loss(render);
    check_finite(l_zvar, i, "loss_zvar");
    rec.loss_img = l_img;
    rec.loss_zvar = l_zvar;

    // fused adjoint for the single-view losses
    RenderAdjoint adjoint;
    if (weights.lambda_sds != 0.0 || weights.lambda_img != 0.0) {
      Image d_color = ctx.codec.encode_adjoint(residual);
      ops.scale(d_color.values.data(), weights.lambda_sds,
                d_color.values.size());
      if (weights.lambda_img != 0.0)
        ops.add_scaled(d_color.values.data(), weights.lambda_img,
                       d_img.values.data(), d_color.values.size());
      adjoint.d_color = std::move(d_color);
    }
    if (weights.lambda_zvar != 0.0) {
      ops.scale(d_var.values.data(), weights.lambda_zvar,
                d_var.values.size());
      adjoint.d_depth_var = std::move(d_var);
    }

    std::fill(d_sigma.begin(), d_sigma.end(), 0.0);
    std::fill(d_r.begin(), d_r.end(), 0.0);
    std::fill(d_g.begin(), d_g.end(), 0.0);
    std::fill(d_b.begin(), d_b.end(), 0.0);
    if (!adjoint.d_color.values.empty() || !adjoint.d_depth_var.values.empty())
      render_tape_adjoint(field, tape, adjoint, d_sigma.data(), d_r.data(),
                          d_g.data(), d_b.data());

    if (toggles.chs_loss) {
      rec.loss_chs =
          chs_loss_accumulate(field, ctx, lambda, sampling, d_sigma.data());
      check_finite(rec.loss_chs, i, "loss_chs");
    }

    grad.clear();
    apply_raw_chain(field, d_sigma.data(), d_r.data(), d_g.data(), d_b.data(),
                    &grad);
    if (!grad.finite()) throw DivergenceError(i, "gradient");

    rec.loss_total = weights.lambda_sds * rec.loss_sds + rec.loss_chs +
                     weights.lambda_img * rec.loss_img +
                     weights.lambda_zvar * rec.loss_zvar;
    check_finite(rec.loss_total, i, "loss_total");

    opt.step(field, grad);
    rec.seconds = record_timing ? now_seconds() - t0 : 0.0;
    report.rows.push_back(rec);
  }
  return report;
}

}  // namespace sdslab
