// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sdslab/camera.hpp"
#include "sdslab/image.hpp"
#include "sdslab/score_model.hpp"
#include "sdslab/vec3.hpp"
#include "sdslab/voxel_field.hpp"

namespace sdslab {

// 21-joint skeleton in OpenPose hand order: wrist, then four joints per
// finger (MCP, PIP, DIP, TIP) thumb-to-pinky. The topology is a tree rooted
// at the wrist.
struct HandSkeleton {
  static constexpr int kJoints = 21;
  std::array<Vec3, kJoints> joints;
  std::array<int, kJoints> parents;

  double bone_length(int joint) const;  // joint > 0
};

struct PoseParams {
  std::array<double, 5> curl{};    // per finger, radians in [0, pi/2]
  std::array<double, 5> spread{};  // per finger, radians in [-pi/6, pi/6]
  Vec3 wrist_rotation{0, 0, 0};    // Euler XYZ about the wrist
  Vec3 translation{0, 0, 0};
  std::string label = "rest";

  void validate() const;  // throws std::domain_error naming the parameter
};

struct Capsule {
  int joint_a = 0;
  int joint_b = 0;
  double radius = 0.0;
};

// Articulated capsule hand: the volumetric proxy that produces silhouettes,
// projected skeletons and reference voxel fields.
struct CapsuleHand {
  std::string name;  // geometry identity, e.g. "hand5" / "hand4"
  std::string pose_label = "rest";
  HandSkeleton skeleton;
  std::vector<Capsule> capsules;
  std::vector<int> capsule_part;        // palette part per capsule (0..5)
  std::array<std::array<double, 3>, 6> palette{};  // per-part RGB
};

// Rest-pose builders. "hand5" is the full five-finger hand; "hand4" shares
// the skeleton but carries no pinky capsules.
CapsuleHand make_capsule_hand(const std::string& name);

// Forward kinematics along the topology tree; bone lengths are preserved.
CapsuleHand articulate(const CapsuleHand& rest, const PoseParams& pose);

// Exact per-pixel ray-capsule test; pixel = 1 iff the camera ray hits any
// capsule in front of the camera.
Image silhouette_mask(const CapsuleHand& hand, const Camera& camera);

struct ProjectedKeypoint {
  double x = 0.0;
  double y = 0.0;
  bool visible = false;
};

// Perspective projection of all 21 joints with self-occlusion visibility:
// a joint is visible when the first capsule its viewing ray hits is one of
// its own (and the joint lies in front of the image plane).
std::array<ProjectedKeypoint, HandSkeleton::kJoints> project_keypoints(
    const CapsuleHand& hand, const Camera& camera);

// Condition key for skeleton-guided score restriction. The semantic label is
// "<geometry>/<pose>"; the hash fingerprints the projected 2D skeleton.
ConditionKey make_condition_key(const CapsuleHand& hand, const Camera& camera,
                                const std::string& view_label);

// Reference field: high constant density inside the capsules, per-part
// colors from a fixed palette.
VoxelField voxelize(const CapsuleHand& hand, int resolution, double extent);

// Smallest non-negative ray parameter hitting the capsule, if any.
bool ray_capsule_hit(const Ray& ray, const Vec3& a, const Vec3& b,
                     double radius, double* t_hit);

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

// Plain-text skeleton serialization: 21 lines of "index parent x y z".
void write_skeleton(const std::filesystem::path& path, const CapsuleHand& hand);

}  // namespace sdslab
