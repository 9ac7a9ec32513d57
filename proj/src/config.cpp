// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sdslab/image.hpp"

namespace sdslab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_num(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': cannot parse number '" +
                      v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config field '" + key + "': expected true/false, got '" +
                    v + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  if (field_resolution < 8) fail("field_resolution", "must be >= 8");
  if (!(field_extent > 0.0)) fail("field_extent", "must be > 0");
  if (image_size < 4) fail("image_size", "must be >= 4");
  if (latent_size < 1) fail("latent_size", "must be >= 1");
  if (image_size % latent_size != 0)
    fail("latent_size", "must divide image_size");
  if (ray_samples < 2 || ray_samples > 512)
    fail("ray_samples", "must be in [2, 512]");
  if (chs_image_size < 4) fail("chs_image_size", "must be >= 4");
  if (camera_count < 1) fail("camera_count", "must be >= 1");
  if (!(camera_radius > field_extent * std::sqrt(3.0)))
    fail("camera_radius", "camera must sit outside the field's bounding box");
  if (!(camera_fov > 0.0 && camera_fov < 180.0))
    fail("camera_fov", "must be in (0, 180)");
  if (camera_elevations.empty()) fail("camera_elevations", "needs >= 1 entry");
  for (double el : camera_elevations)
    if (!(el > -90.0 && el < 90.0))
      fail("camera_elevations", "entries must lie in (-90, 90)");
  if (hand_geometry != "hand5" && hand_geometry != "hand4")
    fail("hand_geometry", "unknown geometry '" + hand_geometry + "'");
  if (pose_label.empty()) fail("pose_label", "must be non-empty");
  if (pose_curl.size() != 5) fail("pose_curl", "needs exactly 5 entries");
  if (pose_spread.size() != 5) fail("pose_spread", "needs exactly 5 entries");
  for (double c : pose_curl)
    if (c < 0.0 || c > 1.5707963267948966 + 1e-12)
      fail("pose_curl", "entries must lie in [0, pi/2]");
  for (double s : pose_spread)
    if (std::abs(s) > 0.5235987755982988 + 1e-12)
      fail("pose_spread", "entries must lie in [-pi/6, pi/6]");
  if (landscape_geometries.empty())
    fail("landscape_geometries", "needs >= 1 entry");
  for (const auto& g : landscape_geometries)
    if (g != "hand5" && g != "hand4")
      fail("landscape_geometries", "unknown geometry '" + g + "'");
  if (landscape_weights.size() != landscape_geometries.size())
    fail("landscape_weights", "must match landscape_geometries in length");
  double wsum = 0.0;
  for (double w : landscape_weights) {
    if (!(w > 0.0)) fail("landscape_weights", "entries must be > 0");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    fail("landscape_weights", "must sum to 1");
  if (diffusion_steps < 2) fail("diffusion_steps", "must be >= 2");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    fail("beta_start", "betas must satisfy 0 < start <= end < 1");
  if (!(t_min >= 1 && t_min < t_max && t_max <= diffusion_steps))
    fail("t_max", "need 1 <= t_min < t_max <= diffusion_steps");
  if (!(lambda_chs_min >= 0.0 && lambda_chs_max >= lambda_chs_min))
    fail("lambda_chs_max", "need lambda_max >= lambda_min >= 0");
  if (lambda_sds < 0.0) fail("lambda_sds", "must be >= 0");
  if (lambda_img < 0.0) fail("lambda_img", "must be >= 0");
  if (lambda_zvar < 0.0) fail("lambda_zvar", "must be >= 0");
  if (iters_init < 1) fail("iters_init", "must be >= 1");
  if (iters_sds < 0) fail("iters_sds", "must be >= 0");
  if (!(lr_init > 0.0)) fail("lr_init", "must be > 0");
  if (!(lr_sds > 0.0)) fail("lr_sds", "must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1", "in [0,1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2", "in [0,1)");
  if (!(adam_eps > 0.0)) fail("adam_eps", "must be > 0");
  if (out_dir.empty()) fail("out_dir", "must be non-empty");
}

std::string ExperimentConfig::emit() const {
  std::ostringstream o;
  o << "# sdslab experiment configuration\n";
  o << "seed = " << seed << "\n";
  o << "out_dir = " << out_dir << "\n";
  o << "field_resolution = " << field_resolution << "\n";
  o << "field_extent = " << format_double(field_extent) << "\n";
  o << "image_size = " << image_size << "\n";
  o << "latent_size = " << latent_size << "\n";
  o << "ray_samples = " << ray_samples << "\n";
  o << "chs_image_size = " << chs_image_size << "\n";
  o << "camera_count = " << camera_count << "\n";
  o << "camera_radius = " << format_double(camera_radius) << "\n";
  o << "camera_fov = " << format_double(camera_fov) << "\n";
  o << "camera_elevations = " << join(camera_elevations) << "\n";
  o << "hand_geometry = " << hand_geometry << "\n";
  o << "pose_label = " << pose_label << "\n";
  o << "pose_curl = " << join(pose_curl) << "\n";
  o << "pose_spread = " << join(pose_spread) << "\n";
  o << "landscape_geometries = " << join(landscape_geometries) << "\n";
  o << "landscape_weights = " << join(landscape_weights) << "\n";
  o << "diffusion_steps = " << diffusion_steps << "\n";
  o << "beta_start = " << format_double(beta_start) << "\n";
  o << "beta_end = " << format_double(beta_end) << "\n";
  o << "t_max = " << t_max << "\n";
  o << "t_min = " << t_min << "\n";
  o << "lambda_chs_max = " << format_double(lambda_chs_max) << "\n";
  o << "lambda_chs_min = " << format_double(lambda_chs_min) << "\n";
  o << "lambda_sds = " << format_double(lambda_sds) << "\n";
  o << "lambda_img = " << format_double(lambda_img) << "\n";
  o << "lambda_zvar = " << format_double(lambda_zvar) << "\n";
  o << "skeleton_condition = " << (skeleton_condition ? "true" : "false") << "\n";
  o << "shape_init = " << (shape_init ? "true" : "false") << "\n";
  o << "chs_loss = " << (chs_loss ? "true" : "false") << "\n";
  o << "iters_init = " << iters_init << "\n";
  o << "iters_sds = " << iters_sds << "\n";
  o << "lr_init = " << format_double(lr_init) << "\n";
  o << "lr_sds = " << format_double(lr_sds) << "\n";
  o << "adam_beta1 = " << format_double(adam_beta1) << "\n";
  o << "adam_beta2 = " << format_double(adam_beta2) << "\n";
  o << "adam_eps = " << format_double(adam_eps) << "\n";
  o << "jitter = " << (jitter ? "true" : "false") << "\n";
  o << "record_timing = " << (record_timing ? "true" : "false") << "\n";
  return o.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(ExperimentConfig&, const std::string&,
                                    const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"seed", [](auto& c, auto& k, auto& v) {
         c.seed = static_cast<std::uint64_t>(parse_num(k, v));
       }},
      {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"field_resolution", [](auto& c, auto& k, auto& v) {
         c.field_resolution = static_cast<int>(parse_num(k, v));
       }},
      {"field_extent", [](auto& c, auto& k, auto& v) {
         c.field_extent = parse_num(k, v);
       }},
      {"image_size", [](auto& c, auto& k, auto& v) {
         c.image_size = static_cast<int>(parse_num(k, v));
       }},
      {"latent_size", [](auto& c, auto& k, auto& v) {
         c.latent_size = static_cast<int>(parse_num(k, v));
       }},
      {"ray_samples", [](auto& c, auto& k, auto& v) {
         c.ray_samples = static_cast<int>(parse_num(k, v));
       }},
      {"chs_image_size", [](auto& c, auto& k, auto& v) {
         c.chs_image_size = static_cast<int>(parse_num(k, v));
       }},
      {"camera_count", [](auto& c, auto& k, auto& v) {
         c.camera_count = static_cast<int>(parse_num(k, v));
       }},
      {"camera_radius", [](auto& c, auto& k, auto& v) {
         c.camera_radius = parse_num(k, v);
       }},
      {"camera_fov", [](auto& c, auto& k, auto& v) {
         c.camera_fov = parse_num(k, v);
       }},
      {"camera_elevations", [](auto& c, auto& k, auto& v) {
         c.camera_elevations.clear();
         for (const auto& item : split_list(v))
           c.camera_elevations.push_back(parse_num(k, item));
       }},
      {"hand_geometry", [](auto& c, auto&, auto& v) { c.hand_geometry = v; }},
      {"pose_label", [](auto& c, auto&, auto& v) { c.pose_label = v; }},
      {"pose_curl", [](auto& c, auto& k, auto& v) {
         c.pose_curl.clear();
         for (const auto& item : split_list(v))
           c.pose_curl.push_back(parse_num(k, item));
       }},
      {"pose_spread", [](auto& c, auto& k, auto& v) {
         c.pose_spread.clear();
         for (const auto& item : split_list(v))
           c.pose_spread.push_back(parse_num(k, item));
       }},
      {"landscape_geometries", [](auto& c, auto&, auto& v) {
         c.landscape_geometries = split_list(v);
       }},
      {"landscape_weights", [](auto& c, auto& k, auto& v) {
         c.landscape_weights.clear();
         for (const auto& item : split_list(v))
           c.landscape_weights.push_back(parse_num(k, item));
       }},
      {"diffusion_steps", [](auto& c, auto& k, auto& v) {
         c.diffusion_steps = static_cast<int>(parse_num(k, v));
       }},
      {"beta_start", [](auto& c, auto& k, auto& v) {
         c.beta_start = parse_num(k, v);
       }},
      {"beta_end", [](auto& c, auto& k, auto& v) {
         c.beta_end = parse_num(k, v);
       }},
      {"t_max", [](auto& c, auto& k, auto& v) {
         c.t_max = static_cast<int>(parse_num(k, v));
       }},
      {"t_min", [](auto& c, auto& k, auto& v) {
         c.t_min = static_cast<int>(parse_num(k, v));
       }},
      {"lambda_chs_max", [](auto& c, auto& k, auto& v) {
         c.lambda_chs_max = parse_num(k, v);
       }},
      {"lambda_chs_min", [](auto& c, auto& k, auto& v) {
         c.lambda_chs_min = parse_num(k, v);
       }},
      {"lambda_sds", [](auto& c, auto& k, auto& v) {
         c.lambda_sds = parse_num(k, v);
       }},
      {"lambda_img", [](auto& c, auto& k, auto& v) {
         c.lambda_img = parse_num(k, v);
       }},
      {"lambda_zvar", [](auto& c, auto& k, auto& v) {
         c.lambda_zvar = parse_num(k, v);
       }},
      {"skeleton_condition", [](auto& c, auto& k, auto& v) {
         c.skeleton_condition = parse_bool(k, v);
       }},
      {"shape_init", [](auto& c, auto& k, auto& v) {
         c.shape_init = parse_bool(k, v);
       }},
      {"chs_loss", [](auto& c, auto& k, auto& v) {
         c.chs_loss = parse_bool(k, v);
       }},
      {"iters_init", [](auto& c, auto& k, auto& v) {
         c.iters_init = static_cast<int>(parse_num(k, v));
       }},
      {"iters_sds", [](auto& c, auto& k, auto& v) {
         c.iters_sds = static_cast<int>(parse_num(k, v));
       }},
      {"lr_init", [](auto& c, auto& k, auto& v) {
         c.lr_init = parse_num(k, v);
       }},
      {"lr_sds", [](auto& c, auto& k, auto& v) {
         c.lr_sds = parse_num(k, v);
       }},
      {"adam_beta1", [](auto& c, auto& k, auto& v) {
         c.adam_beta1 = parse_num(k, v);
       }},
      {"adam_beta2", [](auto& c, auto& k, auto& v) {
         c.adam_beta2 = parse_num(k, v);
       }},
      {"adam_eps", [](auto& c, auto& k, auto& v) {
         c.adam_eps = parse_num(k, v);
       }},
      {"jitter", [](auto& c, auto& k, auto& v) {
         c.jitter = parse_bool(k, v);
       }},
      {"record_timing", [](auto& c, auto& k, auto& v) {
         c.record_timing = parse_bool(k, v);
       }},
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown field '" + key + "'");
    it->second(c, key, value);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  write_file_atomic(path, emit());
}

std::filesystem::path ExperimentConfig::resolved_out_dir() const {
  const char* root = std::getenv("SDSLAB_OUT");
  if (root && *root) return std::filesystem::path(root) / out_dir;
  return std::filesystem::path(out_dir);
}

}  // namespace sdslab
