// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sdslab/hand.hpp"
#include "sdslab/render.hpp"
#include "sdslab/rng.hpp"

using namespace sdslab;

namespace {

Camera front_camera(int size = 64) {
  Camera cam;
  cam.position = {0, 0, 2.4};
  cam.look_at = {0, 0, 0};
  cam.fov_deg = 50.0;
  cam.image_size = size;
  return cam;
}

PoseParams open_pose() {
  PoseParams pose;
  pose.label = "open";
  pose.curl = {0.30, 0.25, 0.20, 0.25, 0.30};
  pose.spread = {-0.20, -0.10, 0.0, 0.10, 0.20};
  return pose;
}

PoseParams random_pose(Rng& rng) {
  PoseParams pose;
  pose.label = "random";
  for (int f = 0; f < 5; ++f) {
    pose.curl[f] = rng.uniform(0.0, std::numbers::pi / 2);
    pose.spread[f] = rng.uniform(-std::numbers::pi / 6, std::numbers::pi / 6);
  }
  pose.wrist_rotation = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                         rng.uniform(-0.5, 0.5)};
  pose.translation = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                      rng.uniform(-0.1, 0.1)};
  return pose;
}

// 512-point supersampled coverage fraction per pixel
double supersampled_mask_fraction(const CapsuleHand& hand, const Camera& cam) {
  int set = 0;
  Rng rng(12345);
  const int sub = 512;
  for (int py = 0; py < cam.image_size; ++py)
    for (int px = 0; px < cam.image_size; ++px) {
      int hits = 0;
      for (int s = 0; s < sub; ++s) {
        const double jx = jitter_value(1, px, py, 2 * s) - 0.5;
        const double jy = jitter_value(1, px, py, 2 * s + 1) - 0.5;
        const Ray ray = cam.pixel_ray(px + jx, py + jy);
        double t;
        for (const auto& c : hand.capsules) {
          if (ray_capsule_hit(ray, hand.skeleton.joints[c.joint_a],
                              hand.skeleton.joints[c.joint_b], c.radius, &t)) {
            ++hits;
            break;
          }
        }
      }
      if (hits * 2 >= sub) ++set;
    }
  return static_cast<double>(set) / (cam.image_size * cam.image_size);
}

}  // namespace

TEST_CASE("skeleton structure: 21 joints, a tree, positive bones") {
  for (const char* name : {"hand5", "hand4"}) {
    const CapsuleHand hand = make_capsule_hand(name);
    CHECK(hand.skeleton.parents[0] == -1);
    for (int j = 1; j < HandSkeleton::kJoints; ++j) {
      CHECK(hand.skeleton.parents[j] >= 0);
      CHECK(hand.skeleton.parents[j] < j);  // parents precede children
      CHECK(hand.skeleton.bone_length(j) > 0.0);
    }
    for (const auto& c : hand.capsules) CHECK(c.radius > 0.0);
  }
  // the four-finger variant shares the skeleton but carries fewer capsules
  CHECK(make_capsule_hand("hand4").capsules.size() <
        make_capsule_hand("hand5").capsules.size());
  CHECK_THROWS_AS(make_capsule_hand("tentacle"), std::invalid_argument);
}

TEST_CASE("hand volume stays inside the default field bounds") {
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  for (const auto& c : hand.capsules) {
    for (int j : {c.joint_a, c.joint_b}) {
      const Vec3& p = hand.skeleton.joints[j];
      CHECK(std::abs(p.x) + c.radius < 1.2);
      CHECK(std::abs(p.y) + c.radius < 1.2);
      CHECK(std::abs(p.z) + c.radius < 1.2);
    }
  }
}

TEST_CASE("adjacent capsules overlap along each finger") {
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  for (std::size_t i = 0; i + 1 < hand.capsules.size(); ++i) {
    const auto& a = hand.capsules[i];
    for (std::size_t j = i + 1; j < hand.capsules.size(); ++j) {
      const auto& b = hand.capsules[j];
      if (a.joint_b == b.joint_a) {
        // shared joint: spheres of both capsules cover it
        const Vec3& shared = hand.skeleton.joints[a.joint_b];
        CHECK(point_segment_distance(shared, hand.skeleton.joints[a.joint_a],
                                     hand.skeleton.joints[a.joint_b]) <
              a.radius + 1e-12);
        CHECK(point_segment_distance(shared, hand.skeleton.joints[b.joint_a],
                                     hand.skeleton.joints[b.joint_b]) <
              b.radius + 1e-12);
      }
    }
  }
}

TEST_CASE("articulate: identity pose, curl shortening, length preservation") {
  const CapsuleHand rest = make_capsule_hand("hand5");

  PoseParams zero;
  zero.label = "zero";
  const CapsuleHand same = articulate(rest, zero);
  for (int j = 0; j < HandSkeleton::kJoints; ++j) {
    CHECK(same.skeleton.joints[j].x ==
          doctest::Approx(rest.skeleton.joints[j].x).epsilon(1e-12));
    CHECK(same.skeleton.joints[j].y ==
          doctest::Approx(rest.skeleton.joints[j].y).epsilon(1e-12));
    CHECK(same.skeleton.joints[j].z ==
          doctest::Approx(rest.skeleton.joints[j].z).epsilon(1e-12));
  }

  // full curl on the index finger pulls its tip toward the wrist
  PoseParams curl = zero;
  curl.curl[1] = std::numbers::pi / 2;
  const CapsuleHand curled = articulate(rest, curl);
  const Vec3 wrist = rest.skeleton.joints[0];
  CHECK(norm(curled.skeleton.joints[8] - wrist) <
        norm(rest.skeleton.joints[8] - wrist));
  // other fingertips unchanged
  for (int tip : {4, 12, 16, 20}) {
    CHECK(norm(curled.skeleton.joints[tip] - rest.skeleton.joints[tip]) <
          1e-12);
  }

  // bone lengths preserved under random poses
  Rng rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    const CapsuleHand posed = articulate(rest, random_pose(rng));
    for (int j = 1; j < HandSkeleton::kJoints; ++j)
      CHECK(std::abs(posed.skeleton.bone_length(j) -
                     rest.skeleton.bone_length(j)) < 1e-10);
  }

  PoseParams bad = zero;
  bad.curl[2] = 2.0;
  CHECK_THROWS_WITH_AS(articulate(rest, bad), doctest::Contains("curl[2]"),
                       std::domain_error);
  bad = zero;
  bad.spread[4] = 1.0;
  CHECK_THROWS_WITH_AS(articulate(rest, bad), doctest::Contains("spread[4]"),
                       std::domain_error);
}

TEST_CASE("silhouette: behind-camera, single capsule, supersampled oracle") {
  CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  Camera cam = front_camera(32);

  // hand fully behind the camera
  cam.position = {0, 0, -3.0};
  cam.look_at = {0, 0, -6.0};
  const Image empty = silhouette_mask(hand, cam);
  for (double v : empty.values) CHECK(v == 0.0);

  // single capsule on the optical axis: center pixel covered
  CapsuleHand one;
  one.name = "hand5";
  one.skeleton = hand.skeleton;
  one.skeleton.joints[0] = {0, -0.3, 0};
  one.skeleton.joints[1] = {0, 0.3, 0};
  one.capsules = {{0, 1, 0.2}};
  one.capsule_part = {0};
  const Camera front = front_camera(33);
  const Image stadium = silhouette_mask(one, front);
  CHECK(stadium.at(16, 16) == 1.0);
  CHECK(stadium.at(0, 0) == 0.0);
  double covered = 0;
  for (double v : stadium.values) covered += v;
  CHECK(covered > 0);

  // full hand vs 512-sample supersampled oracle: mask fractions agree
  const Camera c64 = front_camera(64);
  const Image mask = silhouette_mask(hand, c64);
  double frac = 0;
  for (double v : mask.values) frac += v;
  frac /= mask.values.size();
  const double oracle = supersampled_mask_fraction(hand, c64);
  CHECK(std::abs(frac - oracle) < 0.01);
}

TEST_CASE("projection: center, translation sign, self-occlusion") {
  CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  Camera cam = front_camera(64);

  // a joint on the optical axis projects to the image center
  CapsuleHand centered = hand;
  for (auto& j : centered.skeleton.joints) j = {0.4, 0.4, 0.4};
  centered.skeleton.joints[0] = {0, 0, 0};
  const auto kp = project_keypoints(centered, cam);
  CHECK(kp[0].x == doctest::Approx(31.5).epsilon(1e-9));
  CHECK(kp[0].y == doctest::Approx(31.5).epsilon(1e-9));

  // translating the camera right shifts all projections left
  const auto base = project_keypoints(hand, cam);
  Camera shifted = cam;
  shifted.position.x += 0.3;
  shifted.look_at.x += 0.3;
  const auto moved = project_keypoints(hand, shifted);
  for (int j = 0; j < HandSkeleton::kJoints; ++j)
    CHECK(moved[j].x < base[j].x);

  // side view: at least one joint occluded by another finger
  Camera side = cam;
  side.position = {2.4, 0, 0};
  const auto side_kp = project_keypoints(hand, side);
  int occluded = 0;
  for (const auto& p : side_kp)
    if (!p.visible) ++occluded;
  CHECK(occluded >= 1);

  // joints behind the image plane are flagged invisible
  Camera behind = cam;
  behind.position = {0, 0, -3.0};
  behind.look_at = {0, 0, -6.0};
  const auto bk = project_keypoints(hand, behind);
  for (const auto& p : bk) CHECK(!p.visible);
}

TEST_CASE("visible projected joints land inside the silhouette") {
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  Rng rng(9);
  for (double az : {10.0, 95.0, 200.0, 291.0}) {
    Camera cam = front_camera(64);
    const double rad = az * std::numbers::pi / 180.0;
    cam.position = {2.4 * std::sin(rad), 0.6, 2.4 * std::cos(rad)};
    const Image mask = silhouette_mask(hand, cam);
    const auto kps = project_keypoints(hand, cam);
    for (const auto& kp : kps) {
      if (!kp.visible) continue;
      const int px = static_cast<int>(std::lround(kp.x));
      const int py = static_cast<int>(std::lround(kp.y));
      REQUIRE(px >= 0);
      REQUIRE(px < 64);
      REQUIRE(py >= 0);
      REQUIRE(py < 64);
      CHECK(mask.at(px, py) == 1.0);
    }
  }
}

TEST_CASE("condition keys are deterministic and pose/camera sensitive") {
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  const Camera cam = front_camera(64);
  const ConditionKey k1 = make_condition_key(hand, cam, "front");
  const ConditionKey k2 = make_condition_key(hand, cam, "front");
  CHECK(k1.hash64 == k2.hash64);
  CHECK(k1.skeleton_label == "hand5/open");

  Camera other = cam;
  other.position.x += 0.05;
  CHECK(make_condition_key(hand, other, "front").hash64 != k1.hash64);

  PoseParams p2 = open_pose();
  p2.curl[0] += 0.01;
  const CapsuleHand hand2 = articulate(make_capsule_hand("hand5"), p2);
  CHECK(make_condition_key(hand2, cam, "front").hash64 != k1.hash64);
}

TEST_CASE("articulation continuity: tiny pose deltas barely move the mask") {
  const CapsuleHand rest = make_capsule_hand("hand5");
  const Camera cam = front_camera(64);
  PoseParams a = open_pose();
  PoseParams b = a;
  for (int f = 0; f < 5; ++f) b.curl[f] += 1e-3;
  const Image ma = silhouette_mask(articulate(rest, a), cam);
  const Image mb = silhouette_mask(articulate(rest, b), cam);
  int flips = 0;
  for (std::size_t p = 0; p < ma.values.size(); ++p)
    if (ma.values[p] != mb.values[p]) ++flips;
  CHECK(flips <= static_cast<int>(0.005 * ma.values.size()));
}

TEST_CASE("voxelize: empty hand, capsule volume, cross-module consistency") {
  // no capsules -> zero density
  CapsuleHand none;
  none.name = "hand5";
  none.skeleton = make_capsule_hand("hand5").skeleton;
  const VoxelField empty = voxelize(none, 16, 1.0);
  for (double v : empty.sigma()) CHECK(v < 1e-17);

  // single capsule occupancy vs analytic volume pi r^2 L + 4/3 pi r^3
  CapsuleHand one = none;
  one.skeleton.joints[0] = {0, -0.5, 0};
  one.skeleton.joints[1] = {0, 0.5, 0};
  one.capsules = {{0, 1, 0.3}};
  one.capsule_part = {0};
  const int res = 96;
  const VoxelField vox = voxelize(one, res, 1.0);
  std::size_t occupied = 0;
  for (double v : vox.sigma())
    if (v > 1.0) ++occupied;
  const double cell_vol = std::pow(vox.cell_spacing(), 3);
  const double analytic = std::numbers::pi * 0.09 * 1.0 +
                          4.0 / 3.0 * std::numbers::pi * 0.027;
  CHECK(occupied * cell_vol == doctest::Approx(analytic).epsilon(0.05));

  CHECK_THROWS_AS(voxelize(one, 4, 1.0), std::invalid_argument);

  // rendered voxelization matches the exact silhouette on >= 95% of pixels
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  const VoxelField field = voxelize(hand, 48, 1.2);
  const Camera cam = front_camera(64);
  const Image mask = silhouette_mask(hand, cam);
  const RenderOutput render = render_view(field, cam, {48, false, 0});
  int agree = 0;
  for (std::size_t p = 0; p < mask.values.size(); ++p) {
    const bool a = mask.values[p] > 0.5;
    const bool b = render.normalized_opacity.values[p] > 0.5;
    if (a == b) ++agree;
  }
  CHECK(agree >= static_cast<int>(0.95 * mask.values.size()));
}

TEST_CASE("skeleton serialization round-trips through text") {
  const CapsuleHand hand = articulate(make_capsule_hand("hand5"), open_pose());
  const auto path = std::filesystem::temp_directory_path() / "skel_test.txt";
  write_skeleton(path, hand);
  std::ifstream in(path);
  int idx, parent, lines = 0;
  double x, y, z;
  while (in >> idx >> parent >> x >> y >> z) {
    CHECK(idx == lines);
    CHECK(parent == hand.skeleton.parents[idx]);
    CHECK(x == doctest::Approx(hand.skeleton.joints[idx].x).epsilon(1e-15));
    ++lines;
  }
  CHECK(lines == 21);
  std::filesystem::remove(path);
}
