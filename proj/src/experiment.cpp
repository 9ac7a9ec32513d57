// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sdslab/image.hpp"
#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"

namespace sdslab {

namespace {

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '/' || c == ' ') c = '_';
  return out;
}

PoseParams pose_from_config(const ExperimentConfig& config) {
  PoseParams pose;
  pose.label = config.pose_label;
  for (int f = 0; f < 5; ++f) {
    pose.curl[f] = config.pose_curl[f];
    pose.spread[f] = config.pose_spread[f];
  }
  return pose;
}

}  // namespace

SdsContext build_context(const ExperimentConfig& config) {
  config.validate();
  SdsContext ctx;
  ctx.schedule = std::make_unique<NoiseSchedule>(NoiseSchedule::linear(
      config.diffusion_steps, config.beta_start, config.beta_end));
  ctx.plan.t_max = config.t_max;
  ctx.plan.t_min = config.t_min;
  ctx.plan.i_max = std::max(1, config.iters_sds);
  ctx.plan.lambda_max_chs = config.lambda_chs_max;
  ctx.plan.lambda_min_chs = config.lambda_chs_min;
  ctx.plan.validate();
  ctx.codec = LatentCodec(config.image_size, config.latent_size, 3);
  ctx.ray_samples = config.ray_samples;
  ctx.jitter = config.jitter;

  const PoseParams pose = pose_from_config(config);
  ctx.hand = articulate(make_capsule_hand(config.hand_geometry), pose);

  // camera ring
  ctx.cameras = camera_ring(config.camera_count, config.camera_radius,
                            config.camera_elevations, config.camera_fov,
                            config.image_size);
  for (const auto& cam : ctx.cameras) ctx.cam_buckets.push_back(view_bucket_of(cam));

  // landscape: per bucket, each candidate field encoded as the mean over the
  // bucket's ring views (canonical bucket camera when the ring has none)
  ctx.landscape.codec = ctx.codec;
  ctx.landscape.schedule = ctx.schedule.get();
  const RaySampling mode_sampling{config.ray_samples, false, 0};
  std::vector<VoxelField> ref_fields;
  std::vector<std::string> ref_labels;
  for (const auto& g : config.landscape_geometries) {
    ref_fields.push_back(voxelize(articulate(make_capsule_hand(g), pose),
                                  config.field_resolution,
                                  config.field_extent));
    ref_labels.push_back(g + "/" + config.pose_label);
  }
  for (const auto& bucket : all_view_buckets()) {
    std::vector<Camera> bucket_cams;
    for (std::size_t v = 0; v < ctx.cameras.size(); ++v)
      if (ctx.cam_buckets[v] == bucket) bucket_cams.push_back(ctx.cameras[v]);
    if (bucket_cams.empty())
      bucket_cams.push_back(canonical_bucket_camera(
          bucket, config.camera_radius, config.camera_elevations.front(),
          config.camera_fov, config.image_size));
    std::vector<GaussianMode> modes;
    for (std::size_t g = 0; g < ref_fields.size(); ++g) {
      GaussianMode m;
      m.mu.assign(ctx.codec.latent_dim(), 0.0);
      for (const auto& cam : bucket_cams) {
        const auto z = ctx.codec.encode(
            render_view(ref_fields[g], cam, mode_sampling).color_image);
        kernels::active().add_scaled(m.mu.data(),
                                     1.0 / bucket_cams.size(), z.data(),
                                     z.size());
      }
      m.weight = config.landscape_weights[g];
      m.label = ref_labels[g];
      modes.push_back(std::move(m));
    }
    ctx.landscape.buckets[bucket] = std::move(modes);
  }
  ctx.landscape.validate();

  // silhouettes, CHS tapes and conditioned mode lists
  VoxelField probe(config.field_resolution, config.field_extent);
  for (const auto& cam : ctx.cameras) {
    ctx.cam_rays.push_back(build_camera_rays(cam, config.field_extent));
    ctx.masks.push_back(silhouette_mask(ctx.hand, cam));
    Camera chs_cam = cam;
    chs_cam.image_size = config.chs_image_size;
    ctx.chs_rays.push_back(build_camera_rays(chs_cam, config.field_extent));
    ctx.chs_masks.push_back(silhouette_mask(ctx.hand, chs_cam));
    ctx.chs_tapes.push_back(
        build_opacity_tape(probe, ctx.chs_rays.back(), config.ray_samples));
    const std::string& bucket = ctx.cam_buckets[ctx.cam_rays.size() - 1];
    ctx.cam_keys.push_back(make_condition_key(ctx.hand, cam, bucket));
    if (config.skeleton_condition) {
      ctx.cam_modes.push_back(
          condition(ctx.landscape, bucket, ctx.cam_keys.back()));
    } else {
      ctx.cam_modes.push_back(ctx.landscape.bucket(bucket));
    }
  }
  return ctx;
}

ModeAssignment mode_consistency(const std::vector<Image>& final_renders,
                                const std::vector<std::string>& cam_buckets,
                                const ViewLandscape& landscape) {
  if (final_renders.size() != cam_buckets.size() || final_renders.size() < 1)
    throw std::invalid_argument("mode_consistency: view/bucket size mismatch");
  ModeAssignment out;
  std::map<std::string, int> counts;
  for (std::size_t v = 0; v < final_renders.size(); ++v) {
    const auto z = landscape.codec.encode(final_renders[v]);
    const auto& modes = landscape.bucket(cam_buckets[v]);
    ModeAssignmentEntry entry;
    entry.camera_index = static_cast<int>(v);
    entry.bucket = cam_buckets[v];
    entry.distance = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) {
      double acc = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - m.mu[i];
        acc += d * d;
      }
      const double dist = std::sqrt(acc);
      if (dist < entry.distance) {
        entry.distance = dist;
        entry.label = m.label;
      }
    }
    counts[entry.label]++;
    out.views.push_back(std::move(entry));
  }
  int best = 0;
  for (const auto& [label, count] : counts) {
    if (count > best) {
      best = count;
      out.majority_label = label;
    }
  }
  out.consistency = static_cast<double>(best) /
                    static_cast<double>(final_renders.size());
  return out;
}

std::string ModeAssignment::csv() const {
  std::ostringstream out;
  out << "camera_index,bucket,label,distance\n";
  for (const auto& v : views)
    out << v.camera_index << "," << v.bucket << "," << v.label << ","
        << format_double(v.distance) << "\n";
  out << "# majority=" << majority_label
      << " consistency=" << format_double(consistency) << "\n";
  return out.str();
}

std::vector<std::string> declared_artifacts(const ExperimentConfig& config) {
  std::vector<std::string> files = {"config.cfg", "skeleton.txt", "field.bin",
                                    "report.csv", "mode_assignment.csv",
                                    "checksums.txt"};
  if (config.shape_init) files.push_back("init_report.csv");
  for (const auto& bucket : all_view_buckets())
    for (const auto& g : config.landscape_geometries)
      files.push_back("modes/" + bucket + "_" + sanitize(g) + ".pgm");
  const int n_cams =
      config.camera_count * static_cast<int>(config.camera_elevations.size());
  for (int v = 0; v < n_cams; ++v) {
    files.push_back("masks/mask_" + two_digits(v) + ".pgm");
    files.push_back("renders/render_" + two_digits(v) + ".ppm");
    files.push_back("renders/opacity_" + two_digits(v) + ".pgm");
    files.push_back("renders/depth_" + two_digits(v) + ".bin");
    files.push_back("renders/surface_" + two_digits(v) + ".ppm");
  }
  std::sort(files.begin(), files.end());
  return files;
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  SdsContext ctx = build_context(config);
  const std::filesystem::path dir = config.resolved_out_dir();
  std::filesystem::create_directories(dir);

  RunReport report;
  report.config = config;

  config.save(dir / "config.cfg");
  write_skeleton(dir / "skeleton.txt", ctx.hand);
  for (const auto& [bucket, modes] : ctx.landscape.buckets) {
    for (std::size_t g = 0; g < modes.size(); ++g) {
      const Image decoded = ctx.codec.decode(modes[g].mu);
      Image gray(decoded.width, decoded.height, 1);
      for (std::size_t p = 0; p < gray.values.size(); ++p)
        gray.values[p] = decoded.values[p * 3];
      const std::string geometry =
          config.landscape_geometries[g % config.landscape_geometries.size()];
      write_pgm(dir / "modes" / (bucket + "_" + sanitize(geometry) + ".pgm"),
                gray);
    }
  }
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v)
    write_pgm(dir / "masks" / ("mask_" + two_digits(static_cast<int>(v)) +
                               ".pgm"),
              ctx.masks[v]);

  Rng rng(config.seed);
  VoxelField field = VoxelField::sphere_init(config.field_resolution,
                                             config.field_extent);
  if (config.shape_init) {
    AdamParams adam{config.lr_init, config.adam_beta1, config.adam_beta2,
                    config.adam_eps};
    report.init_report = init_stage(field, ctx, config.iters_init, adam, rng,
                                    config.record_timing);
    report.init_report.write_csv(dir / "init_report.csv",
                                 config.record_timing);
  }

  LossWeights weights{config.lambda_sds, config.lambda_img, config.lambda_zvar};
  Toggles toggles{config.skeleton_condition, config.shape_init,
                  config.chs_loss};
  AdamParams adam{config.lr_sds, config.adam_beta1, config.adam_beta2,
                  config.adam_eps};
  report.sds_report = optimize_stage2(field, ctx, weights, toggles,
                                      config.iters_sds, adam, rng,
                                      config.record_timing);
  report.sds_report.write_csv(dir / "report.csv", config.record_timing);

  // final renders and derived artifacts
  const RaySampling final_sampling{config.ray_samples, false, 0};
  std::vector<Image> final_renders;
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v) {
    const RenderOutput out = render_view(field, ctx.cam_rays[v], final_sampling);
    const std::string id = two_digits(static_cast<int>(v));
    write_ppm(dir / "renders" / ("render_" + id + ".ppm"), out.color_image);
    write_pgm(dir / "renders" / ("opacity_" + id + ".pgm"),
              out.normalized_opacity);
    write_depth(dir / "renders" / ("depth_" + id + ".bin"), out.depth_map);
    write_ppm(dir / "renders" / ("surface_" + id + ".ppm"),
              surface_normal_image(field, ctx.cameras[v], final_sampling));
    final_renders.push_back(out.color_image);
  }
  field.save(dir / "field.bin");

  report.assignment =
      mode_consistency(final_renders, ctx.cam_buckets, ctx.landscape);
  write_file_atomic(dir / "mode_assignment.csv", report.assignment.csv());

  report.final_silhouette_mse = silhouette_mse(field, ctx);
  report.final_chs_rms =
      chs_loss_accumulate(field, ctx, 1.0, final_sampling, nullptr);

  report.artifacts = declared_artifacts(config);
  std::uint64_t h = 0xcbf29ce484222325ull;
  {
    const std::string init_csv =
        config.shape_init ? report.init_report.csv(config.record_timing) : "";
    const std::string sds_csv = report.sds_report.csv(config.record_timing);
    const std::string mode_csv = report.assignment.csv();
    h = fnv1a64(init_csv.data(), init_csv.size(), h);
    h = fnv1a64(sds_csv.data(), sds_csv.size(), h);
    h = fnv1a64(mode_csv.data(), mode_csv.size(), h);
  }
  report.checksum = h;

  std::ostringstream sums;
  for (const auto& rel : report.artifacts) {
    if (rel == "checksums.txt") continue;
    sums << rel << " " << file_checksum(dir / rel) << "\n";
  }
  write_file_atomic(dir / "checksums.txt", sums.str());
  return report;
}

ModeAssignment mode_consistency_of_run(const std::filesystem::path& run_dir) {
  ExperimentConfig config = ExperimentConfig::load(run_dir / "config.cfg");
  const SdsContext ctx = build_context(config);
  std::vector<Image> renders;
  for (std::size_t v = 0; v < ctx.cameras.size(); ++v)
    renders.push_back(read_pnm(
        run_dir / "renders" /
        ("render_" + two_digits(static_cast<int>(v)) + ".ppm")));
  return mode_consistency(renders, ctx.cam_buckets, ctx.landscape);
}

void gradient_field_dump(const ExperimentConfig& config,
                         const std::vector<int>& t_values, int draws,
                         const std::filesystem::path& out_csv,
                         double noise_scale) {
  if (draws < 1) throw ConfigError("gradfield: draws must be >= 1");
  const SdsContext ctx = build_context(config);
  Rng rng(config.seed);

  // initialization per the shape_init toggle, rendered from the first camera
  VoxelField field = VoxelField::sphere_init(config.field_resolution,
                                             config.field_extent);
  if (config.shape_init)
    field = voxelize(ctx.hand, config.field_resolution, config.field_extent);
  const RaySampling sampling{config.ray_samples, false, 0};
  const Image render =
      render_view(field, ctx.cam_rays[0], sampling).color_image;
  const std::vector<double> z = ctx.codec.encode(render);
  const std::size_t dim = z.size();

  // magnitude: the SDS residual (eps_hat - eps), the latent-space gradient
  // the optimization actually applies. score_magnitude: the raw noised-score
  // magnitude at z_t, which keeps the noise term the residual cancels.
  std::ostringstream out;
  out << "t,draw,magnitude,score_magnitude";
  for (std::size_t i = 0; i < dim; ++i) out << ",g" << i;
  out << "\n";
  std::vector<double> eps(dim), residual(dim);
  for (int t : t_values) {
    for (int d = 0; d < draws; ++d) {
      rng.fill_gaussian(eps.data(), dim);
      if (noise_scale != 1.0)
        kernels::active().scale(eps.data(), noise_scale, dim);
      const std::vector<double> z_t = forward_noise(z, t, eps, *ctx.schedule);
      const std::vector<double> eps_hat =
          predict_noise(z_t, ctx.cam_modes[0], t, *ctx.schedule);
      const std::vector<double> score =
          noised_mixture_score(z_t, ctx.cam_modes[0], t, *ctx.schedule);
      kernels::active().axpbyz(1.0, eps_hat.data(), -1.0, eps.data(),
                               residual.data(), dim);
      const double mag =
          std::sqrt(kernels::active().sq_norm(residual.data(), dim));
      const double score_mag =
          std::sqrt(kernels::active().sq_norm(score.data(), dim));
      out << t << "," << d << "," << format_double(mag) << ","
          << format_double(score_mag);
      for (std::size_t i = 0; i < dim; ++i)
        out << "," << format_double(residual[i]);
      out << "\n";
    }
  }
  write_file_atomic(out_csv, out.str());
}

std::vector<AblationRow> ablation_suite(const ExperimentConfig& base,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::filesystem::path& out_csv) {
  if (seeds.size() < 3)
    throw ConfigError("ablation requires at least 3 seeds");
  // rows in the ablation-table order
  const bool rows[6][3] = {
      {false, false, false}, {true, false, false}, {true, true, false},
      {false, true, true},   {true, false, true},  {true, true, true},
  };
  std::vector<AblationRow> table;
  for (int r = 0; r < 6; ++r) {
    AblationRow row;
    row.skeleton_condition = rows[r][0];
    row.shape_init = rows[r][1];
    row.chs_loss = rows[r][2];
    std::vector<double> consistencies, chs_values;
    for (std::uint64_t seed : seeds) {
      ExperimentConfig config = base;
      config.skeleton_condition = row.skeleton_condition;
      config.shape_init = row.shape_init;
      config.chs_loss = row.chs_loss;
      config.seed = seed;
      config.out_dir = base.out_dir + "/ablate/row" + std::to_string(r + 1) +
                       "_seed" + std::to_string(seed);
      const RunReport report = run_experiment(config);
      consistencies.push_back(report.assignment.consistency);
      chs_values.push_back(report.final_chs_rms);
    }
    auto mean_sd = [](const std::vector<double>& v, double* mean, double* sd) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      *mean = m;
      *sd = std::sqrt(s / static_cast<double>(v.size()));
    };
    mean_sd(consistencies, &row.consistency_mean, &row.consistency_sd);
    mean_sd(chs_values, &row.chs_mean, &row.chs_sd);
    table.push_back(row);
  }

  std::ostringstream out;
  out << "row,skeleton_condition,shape_init,chs_loss,consistency_mean,"
         "consistency_sd,chs_rms_mean,chs_rms_sd\n";
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table[r];
    out << (r + 1) << "," << (row.skeleton_condition ? 1 : 0) << ","
        << (row.shape_init ? 1 : 0) << "," << (row.chs_loss ? 1 : 0) << ","
        << format_double(row.consistency_mean) << ","
        << format_double(row.consistency_sd) << ","
        << format_double(row.chs_mean) << "," << format_double(row.chs_sd)
        << "\n";
  }
  write_file_atomic(out_csv, out.str());
  return table;
}

}  // namespace sdslab
