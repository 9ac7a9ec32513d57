// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sdslab/vec3.hpp"

namespace sdslab {

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
};

// Pinhole camera producing square images. Pixel (0,0) is the top-left
// corner; rays pass through pixel centers.
struct Camera {
  Vec3 position{0, 0, 2.4};
  Vec3 look_at{0, 0, 0};
  Vec3 up{0, 1, 0};
  double fov_deg = 50.0;
  int image_size = 64;

  void validate() const;  // throws std::invalid_argument

  // Orthonormal frame: forward toward look_at, right, true up.
  void frame(Vec3* forward, Vec3* right, Vec3* true_up) const;

  Ray pixel_ray(double px, double py) const;

  // Perspective projection of a world point to pixel coordinates.
  // depth receives the signed distance along the forward axis; points with
  // depth <= 0 are behind the image plane.
  void project(const Vec3& world, double* px, double* py, double* depth) const;
};

// Azimuth ring of cameras around the origin, one ring per elevation.
std::vector<Camera> camera_ring(int count, double radius,
                                const std::vector<double>& elevations_deg,
                                double fov_deg, int image_size);

// View-prompt bucket of a camera position: top/bottom above |elevation| 60
// degrees, otherwise front/side/back by azimuth quadrant.
std::string view_bucket_of(const Camera& cam);

// Canonical camera per view bucket (used to build per-bucket mode images).
Camera canonical_bucket_camera(const std::string& bucket, double radius,
                               double elevation_deg, double fov_deg,
                               int image_size);

const std::vector<std::string>& all_view_buckets();

}  // namespace sdslab
