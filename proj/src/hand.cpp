// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/hand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sdslab/rng.hpp"

namespace sdslab {

namespace {

struct Mat3 {
  double m[3][3];

  static Mat3 identity() {
    return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  }

  static Mat3 axis_angle(const Vec3& axis_in, double angle) {
    const Vec3 axis = normalized(axis_in);
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    const double x = axis.x, y = axis.y, z = axis.z;
    return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
             {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
             {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = 0.0;
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
      }
    return r;
  }
};

constexpr double kCurlMax = std::numbers::pi / 2;
constexpr double kSpreadMax = std::numbers::pi / 6;
constexpr Vec3 kPalmNormal{0, 0, 1};

// palette parts: 0 palm, 1..5 thumb..pinky; the two candidate geometries use
// complementary palettes so their encoded renders are well separated
const double kPaletteLight[6][3] = {
    {0.85, 0.70, 0.60},  // palm
    {0.90, 0.62, 0.50},  // thumb
    {0.88, 0.52, 0.45},  // index
    {0.60, 0.85, 0.52},  // middle
    {0.52, 0.65, 0.90},  // ring
    {0.92, 0.80, 0.45},  // pinky
};

const double kPaletteDark[6][3] = {
    {0.15, 0.30, 0.40}, {0.10, 0.38, 0.50}, {0.12, 0.48, 0.55},
    {0.40, 0.15, 0.48}, {0.48, 0.35, 0.10}, {0.08, 0.20, 0.55},
};

struct FingerSpec {
  Vec3 base;
  Vec3 dir;
  double seg[3];
  double radii[3];
};

const FingerSpec kFingers[5] = {
    // thumb
    {{-0.40, -0.38, 0.0}, {-0.55, 0.83, 0.0}, {0.30, 0.22, 0.18},
     {0.080, 0.072, 0.065}},
    // index
    {{-0.30, -0.26, 0.0}, {0.0, 1.0, 0.0}, {0.45, 0.30, 0.25},
     {0.070, 0.065, 0.060}},
    // middle
    {{-0.10, -0.24, 0.0}, {0.0, 1.0, 0.0}, {0.50, 0.33, 0.27},
     {0.072, 0.066, 0.060}},
    // ring
    {{0.10, -0.26, 0.0}, {0.0, 1.0, 0.0}, {0.45, 0.30, 0.25},
     {0.070, 0.065, 0.060}},
    // pinky
    {{0.30, -0.28, 0.0}, {0.0, 1.0, 0.0}, {0.40, 0.27, 0.23},
     {0.062, 0.058, 0.055}},
};

constexpr Vec3 kWrist{0.0, -0.85, 0.0};

}  // namespace

double HandSkeleton::bone_length(int joint) const {
  return norm(joints[joint] - joints[parents[joint]]);
}

void PoseParams::validate() const {
  for (int f = 0; f < 5; ++f) {
    if (curl[f] < 0.0 || curl[f] > kCurlMax + 1e-12)
      throw std::domain_error("pose curl[" + std::to_string(f) +
                              "] outside [0, pi/2]");
    if (std::abs(spread[f]) > kSpreadMax + 1e-12)
      throw std::domain_error("pose spread[" + std::to_string(f) +
                              "] outside [-pi/6, pi/6]");
  }
}

CapsuleHand make_capsule_hand(const std::string& name) {
  if (name != "hand5" && name != "hand4")
    throw std::invalid_argument("unknown hand geometry '" + name + "'");
  CapsuleHand hand;
  hand.name = name;
  const auto& palette = name == "hand4" ? kPaletteDark : kPaletteLight;
  for (int part = 0; part < 6; ++part)
    for (int c = 0; c < 3; ++c) hand.palette[part][c] = palette[part][c];
  hand.skeleton.joints[0] = kWrist;
  hand.skeleton.parents[0] = -1;
  for (int f = 0; f < 5; ++f) {
    const FingerSpec& spec = kFingers[f];
    const Vec3 dir = normalized(spec.dir);
    const int base = 1 + 4 * f;
    hand.skeleton.joints[base] = spec.base;
    hand.skeleton.parents[base] = 0;
    Vec3 p = spec.base;
    for (int s = 0; s < 3; ++s) {
      p = p + dir * spec.seg[s];
      hand.skeleton.joints[base + 1 + s] = p;
      hand.skeleton.parents[base + 1 + s] = base + s;
    }
  }
  // palm fan: wrist to every MCP
  for (int f = 0; f < 5; ++f)
    hand.capsules.push_back({0, 1 + 4 * f, 0.10}), hand.capsule_part.push_back(0);
  // finger bones; hand4 leaves the pinky without volume
  const int finger_count = name == "hand4" ? 4 : 5;
  for (int f = 0; f < finger_count; ++f) {
    const int base = 1 + 4 * f;
    for (int s = 0; s < 3; ++s) {
      hand.capsules.push_back({base + s, base + s + 1, kFingers[f].radii[s]});
      hand.capsule_part.push_back(1 + f);
    }
  }
  hand.pose_label = "rest";
  return hand;
}

CapsuleHand articulate(const CapsuleHand& rest, const PoseParams& pose) {
  pose.validate();
  CapsuleHand out = rest;
  out.pose_label = pose.label;
  const auto& rj = rest.skeleton.joints;
  auto& oj = out.skeleton.joints;

  static const double kCurlSplit[3] = {0.6, 0.5, 0.4};
  for (int f = 0; f < 5; ++f) {
    const int base = 1 + 4 * f;
    const Vec3 dir = normalized(rj[base + 1] - rj[base]);
    const Vec3 bend_axis = normalized(cross(kPalmNormal, dir));
    Mat3 rot = Mat3::axis_angle(kPalmNormal, pose.spread[f]) *
               Mat3::axis_angle(bend_axis, pose.curl[f] * kCurlSplit[0]);
    oj[base] = rj[base];
    Vec3 p = oj[base];
    for (int s = 0; s < 3; ++s) {
      if (s > 0)
        rot = rot * Mat3::axis_angle(bend_axis, pose.curl[f] * kCurlSplit[s]);
      p = p + rot * (rj[base + 1 + s] - rj[base + s]);
      oj[base + 1 + s] = p;
    }
  }
  oj[0] = rj[0];

  // global wrist rotation about the wrist joint, then translation
  const Mat3 wrist_rot =
      Mat3::axis_angle({0, 0, 1}, pose.wrist_rotation.z) *
      Mat3::axis_angle({0, 1, 0}, pose.wrist_rotation.y) *
      Mat3::axis_angle({1, 0, 0}, pose.wrist_rotation.x);
  const Vec3 pivot = rj[0];
  for (int j = 0; j < HandSkeleton::kJoints; ++j)
    oj[j] = wrist_rot * (oj[j] - pivot) + pivot + pose.translation;
  return out;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = norm2(ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + ab * s));
}

bool ray_capsule_hit(const Ray& ray, const Vec3& a, const Vec3& b,
                     double radius, double* t_hit) {
  // origin already inside
  if (point_segment_distance(ray.origin, a, b) <= radius) {
    *t_hit = 0.0;
    return true;
  }
  double best = std::numeric_limits<double>::infinity();

  const Vec3 ab = b - a;
  const double len = norm(ab);
  if (len > 0.0) {
    const Vec3 n = ab / len;
    const Vec3 m = ray.origin - a;
    const Vec3 md = m - n * dot(m, n);
    const Vec3 dd = ray.dir - n * dot(ray.dir, n);
    const double A = norm2(dd);
    if (A > 1e-16) {
      const double B = 2.0 * dot(md, dd);
      const double C = norm2(md) - radius * radius;
      const double disc = B * B - 4.0 * A * C;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
          if (t < 0.0) continue;
          const double s = dot(ray.origin + ray.dir * t - a, n);
          if (s >= 0.0 && s <= len) best = std::min(best, t);
        }
      }
    }
  }
  // spherical caps
  for (const Vec3& c : {a, b}) {
    const Vec3 oc = ray.origin - c;
    const double B = 2.0 * dot(oc, ray.dir);
    const double C = norm2(oc) - radius * radius;
    const double disc = B * B - 4.0 * C;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / 2.0, (-B + sq) / 2.0})
      if (t >= 0.0) best = std::min(best, t);
  }
  if (!std::isfinite(best)) return false;
  *t_hit = best;
  return true;
}

namespace {

// bounding spheres let the per-pixel loop reject most capsules cheaply
struct CapsuleBound {
  Vec3 center;
  double radius;
};

std::vector<CapsuleBound> capsule_bounds(const CapsuleHand& hand) {
  std::vector<CapsuleBound> bounds;
  bounds.reserve(hand.capsules.size());
  for (const auto& c : hand.capsules) {
    const Vec3& a = hand.skeleton.joints[c.joint_a];
    const Vec3& b = hand.skeleton.joints[c.joint_b];
    bounds.push_back({(a + b) * 0.5, 0.5 * norm(b - a) + c.radius});
  }
  return bounds;
}

inline bool may_hit(const Ray& ray, const CapsuleBound& bound) {
  const Vec3 oc = bound.center - ray.origin;
  const double along = dot(oc, ray.dir);
  const double closest2 =
      along >= 0.0 ? norm2(oc) - along * along : norm2(oc);
  return closest2 <= bound.radius * bound.radius;
}

bool first_hit(const CapsuleHand& hand, const std::vector<CapsuleBound>& bounds,
               const Ray& ray, double* t_best, int* capsule_index) {
  double best = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  for (std::size_t i = 0; i < hand.capsules.size(); ++i) {
    if (!may_hit(ray, bounds[i])) continue;
    const Capsule& c = hand.capsules[i];
    double t;
    if (ray_capsule_hit(ray, hand.skeleton.joints[c.joint_a],
                        hand.skeleton.joints[c.joint_b], c.radius, &t) &&
        t < best) {
      best = t;
      best_idx = static_cast<int>(i);
    }
  }
  if (best_idx < 0) return false;
  *t_best = best;
  *capsule_index = best_idx;
  return true;
}

}  // namespace

Image silhouette_mask(const CapsuleHand& hand, const Camera& camera) {
  camera.validate();
  const auto bounds = capsule_bounds(hand);
  Image mask(camera.image_size, camera.image_size, 1);
  for (int py = 0; py < camera.image_size; ++py)
    for (int px = 0; px < camera.image_size; ++px) {
      const Ray ray = camera.pixel_ray(px, py);
      double t;
      int idx;
      if (first_hit(hand, bounds, ray, &t, &idx)) mask.at(px, py) = 1.0;
    }
  return mask;
}

std::array<ProjectedKeypoint, HandSkeleton::kJoints> project_keypoints(
    const CapsuleHand& hand, const Camera& camera) {
  camera.validate();
  const auto bounds = capsule_bounds(hand);
  std::array<ProjectedKeypoint, HandSkeleton::kJoints> out;
  for (int j = 0; j < HandSkeleton::kJoints; ++j) {
    double px, py, depth;
    camera.project(hand.skeleton.joints[j], &px, &py, &depth);
    out[j].x = px;
    out[j].y = py;
    out[j].visible = false;
    if (depth <= 0.0) continue;
    const Vec3 to_joint = hand.skeleton.joints[j] - camera.position;
    const Ray ray{camera.position, normalized(to_joint)};
    double t;
    int idx;
    if (!first_hit(hand, bounds, ray, &t, &idx)) continue;
    const Capsule& c = hand.capsules[idx];
    out[j].visible = (c.joint_a == j || c.joint_b == j);
  }
  return out;
}

ConditionKey make_condition_key(const CapsuleHand& hand, const Camera& camera,
                                const std::string& view_label) {
  const auto kps = project_keypoints(hand, camera);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& kp : kps) {
    const std::int64_t qx = std::llround(kp.x * 1e4);
    const std::int64_t qy = std::llround(kp.y * 1e4);
    const std::int64_t vis = kp.visible ? 1 : 0;
    h = fnv1a64(&qx, sizeof(qx), h);
    h = fnv1a64(&qy, sizeof(qy), h);
    h = fnv1a64(&vis, sizeof(vis), h);
  }
  ConditionKey key;
  key.view_label = view_label;
  key.skeleton_label = hand.name + "/" + hand.pose_label;
  key.hash64 = fnv1a64(key.skeleton_label.data(), key.skeleton_label.size(), h);
  return key;
}

VoxelField voxelize(const CapsuleHand& hand, int resolution, double extent) {
  if (resolution < 8) throw std::invalid_argument("voxelize: resolution < 8");
  VoxelField field(resolution, extent);
  const double raw_occupied = inverse_softplus(50.0);
  const double raw_empty = -40.0;
  const double h = field.cell_spacing();
  auto& raw_d = field.raw_density();
  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        const Vec3 p{-extent + i * h, -extent + j * h, -extent + k * h};
        double best = std::numeric_limits<double>::infinity();
        int part = -1;
        for (std::size_t ci = 0; ci < hand.capsules.size(); ++ci) {
          const Capsule& c = hand.capsules[ci];
          const double d =
              point_segment_distance(p, hand.skeleton.joints[c.joint_a],
                                     hand.skeleton.joints[c.joint_b]) -
              c.radius;
          if (d < best) {
            best = d;
            part = hand.capsule_part[ci];
          }
        }
        const std::size_t idx = field.index(i, j, k);
        if (best <= 0.0 && part >= 0) {
          raw_d[idx] = raw_occupied;
          for (int c = 0; c < 3; ++c)
            field.raw_color(c)[idx] = inverse_logistic(hand.palette[part][c]);
        } else {
          raw_d[idx] = raw_empty;
        }
      }
  field.refresh();
  return field;
}

void write_skeleton(const std::filesystem::path& path,
                    const CapsuleHand& hand) {
  std::ostringstream out;
  for (int j = 0; j < HandSkeleton::kJoints; ++j) {
    const Vec3& p = hand.skeleton.joints[j];
    out << j << " " << hand.skeleton.parents[j] << " " << format_double(p.x)
        << " " << format_double(p.y) << " " << format_double(p.z) << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace sdslab
