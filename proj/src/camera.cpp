// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/camera.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdslab {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void Camera::validate() const {
  if (norm2(position - look_at) == 0.0)
    throw std::invalid_argument("camera position equals look_at");
  const Vec3 f = normalized(look_at - position);
  if (norm(cross(f, up)) < 1e-9)
    throw std::invalid_argument("camera up is parallel to view direction");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw std::invalid_argument("camera fov outside (0, 180)");
  if (image_size < 1) throw std::invalid_argument("camera image_size < 1");
}

void Camera::frame(Vec3* forward, Vec3* right, Vec3* true_up) const {
  *forward = normalized(look_at - position);
  *right = normalized(cross(*forward, up));
  *true_up = cross(*right, *forward);
}

Ray Camera::pixel_ray(double px, double py) const {
  Vec3 f, r, u;
  frame(&f, &r, &u);
  const double half = std::tan(0.5 * fov_deg * kDeg);
  const double ndc_x = (2.0 * (px + 0.5) / image_size - 1.0) * half;
  const double ndc_y = (1.0 - 2.0 * (py + 0.5) / image_size) * half;
  return {position, normalized(f + r * ndc_x + u * ndc_y)};
}

void Camera::project(const Vec3& world, double* px, double* py,
                     double* depth) const {
  Vec3 f, r, u;
  frame(&f, &r, &u);
  const Vec3 d = world - position;
  const double z = dot(d, f);
  *depth = z;
  const double half = std::tan(0.5 * fov_deg * kDeg);
  const double ndc_x = dot(d, r) / z / half;
  const double ndc_y = dot(d, u) / z / half;
  *px = (ndc_x + 1.0) * 0.5 * image_size - 0.5;
  *py = (1.0 - ndc_y) * 0.5 * image_size - 0.5;
}

std::vector<Camera> camera_ring(int count, double radius,
                                const std::vector<double>& elevations_deg,
                                double fov_deg, int image_size) {
  if (count < 1) throw std::invalid_argument("camera ring needs count >= 1");
  if (elevations_deg.empty())
    throw std::invalid_argument("camera ring needs >= 1 elevation");
  std::vector<Camera> cams;
  for (double el : elevations_deg) {
    for (int i = 0; i < count; ++i) {
      // half-step offset keeps ring cameras away from bucket boundaries
      const double az = 360.0 * (i + 0.5) / count;
      Camera c;
      c.position = {radius * std::cos(el * kDeg) * std::sin(az * kDeg),
                    radius * std::sin(el * kDeg),
                    radius * std::cos(el * kDeg) * std::cos(az * kDeg)};
      c.look_at = {0, 0, 0};
      c.up = {0, 1, 0};
      c.fov_deg = fov_deg;
      c.image_size = image_size;
      c.validate();
      cams.push_back(c);
    }
  }
  return cams;
}

std::string view_bucket_of(const Camera& cam) {
  const Vec3 p = cam.position - cam.look_at;
  const double horiz = std::sqrt(p.x * p.x + p.z * p.z);
  const double el = std::atan2(p.y, horiz) / kDeg;
  if (el > 60.0) return "top";
  if (el < -60.0) return "bottom";
  double az = std::atan2(p.x, p.z) / kDeg;  // 0 = +z (front)
  if (az < 0.0) az += 360.0;
  if (az < 45.0 || az >= 315.0) return "front";
  if (az < 135.0) return "side";
  if (az < 225.0) return "back";
  return "side";
}

Camera canonical_bucket_camera(const std::string& bucket, double radius,
                               double elevation_deg, double fov_deg,
                               int image_size) {
  double az = 0.0, el = elevation_deg;
  if (bucket == "front") {
    az = 0.0;
  } else if (bucket == "side") {
    az = 90.0;
  } else if (bucket == "back") {
    az = 180.0;
  } else if (bucket == "top") {
    az = 0.0;
    el = 80.0;
  } else if (bucket == "bottom") {
    az = 0.0;
    el = -80.0;
  } else {
    throw std::invalid_argument("unknown view bucket '" + bucket + "'");
  }
  Camera c;
  c.position = {radius * std::cos(el * kDeg) * std::sin(az * kDeg),
                radius * std::sin(el * kDeg),
                radius * std::cos(el * kDeg) * std::cos(az * kDeg)};
  c.look_at = {0, 0, 0};
  // avoid degenerate up for near-vertical cameras
  c.up = (bucket == "top" || bucket == "bottom") ? Vec3{0, 0, 1}
                                                 : Vec3{0, 1, 0};
  c.fov_deg = fov_deg;
  c.image_size = image_size;
  c.validate();
  return c;
}

const std::vector<std::string>& all_view_buckets() {
  static const std::vector<std::string> buckets = {"front", "side", "back",
                                                   "top", "bottom"};
  return buckets;
}

}  // namespace sdslab
