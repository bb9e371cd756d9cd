#pragma once

#include "dexsim/common.hpp"

#include <optional>

namespace dexsim {

enum class HandSide { Left, Right };

std::string to_string(HandSide side);
HandSide hand_side_from_string(const std::string& s);

/// Linear tie q_u = k * q_a + b between an underactuated joint and an
/// actuated parent joint earlier in the chain.
struct JointCoupling {
  int parent_joint_index = -1;
  double k = 1.0;  // dimensionless
  double b = 0.0;  // rad
};

struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();          // unit rotation axis, parent frame
  Vec3 anchor_offset = Vec3::Zero();  // m, from parent link frame origin
  double lo = -1.57, hi = 1.57;       // rad
  double kp = 10.0;                   // N*m/rad
  double kd = 0.5;                    // N*m*s/rad
  double dry_friction = 0.0;          // N*m
  double inertia = 0.01;              // kg*m^2
  bool actuated = true;
  std::optional<JointCoupling> coupling;
};

struct LinkSpec {
  double length = 0.1;  // m
  double mass = 0.1;    // kg
};

/// Serial kinematic chain for one arm+hand. Joint i rotates link i relative
/// to link i-1 (the mount for i = 0); link i extends along its local +x axis.
struct ChainModel {
  HandSide hand_side = HandSide::Right;
  Isometry mount = Isometry::Identity();
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<int> fingertip_links;  // exactly 4
  int palm_link = 0;

  int joint_count() const { return static_cast<int>(joints.size()); }

  std::vector<int> actuated_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < joint_count(); ++i)
      if (joints[i].actuated) idx.push_back(i);
    return idx;
  }

  int actuated_count() const { return static_cast<int>(actuated_indices().size()); }

  /// Finger joints drive links past the palm; they define hand closure.
  bool is_finger_joint(int i) const { return i > palm_link; }

  void validate() const {
    require(links.size() == joints.size(), "chain must have |links| = |joints|");
    require(!links.empty(), "chain must have at least one link");
    require(fingertip_links.size() == 4, "chain must have exactly 4 fingertip links");
    for (int idx : fingertip_links)
      require(idx >= 0 && idx < joint_count(), "fingertip link index out of range");
    require(palm_link >= 0 && palm_link < joint_count(), "palm link index out of range");
    for (int i = 0; i < joint_count(); ++i) {
      const JointSpec& j = joints[i];
      require(std::abs(j.axis.norm() - 1.0) < 1e-6, "joint axis must be unit: " + j.name);
      require(j.lo < j.hi, "joint limits must satisfy lo < hi: " + j.name);
      require(j.kp > 0.0 && j.kd > 0.0 && j.inertia > 0.0,
              "kp, kd, inertia must be positive: " + j.name);
      require(j.dry_friction >= 0.0, "dry friction must be non-negative: " + j.name);
      if (j.coupling) {
        require(!j.actuated, "coupled joint must not be actuated: " + j.name);
        const int p = j.coupling->parent_joint_index;
        require(p >= 0 && p < i, "coupling parent must be earlier in the chain: " + j.name);
        require(joints[p].actuated, "coupling parent must be actuated: " + j.name);
      }
    }
  }
};

/// Fingertip positions F in R^{4x3} plus the palm pose, world frame.
struct ChainPose {
  std::vector<Isometry> joint_frames;     // frame of link i (origin at joint anchor)
  Eigen::Matrix<double, 4, 3> fingertips;
  Isometry palm = Isometry::Identity();   // origin at the palm link tip
};

inline Vec3 link_tip(const ChainModel& model, const std::vector<Isometry>& frames, int i) {
  return frames[i] * Vec3(model.links[i].length, 0.0, 0.0);
}

/// Composes per-joint axis-angle rotations and link offsets along the chain.
inline ChainPose forward_kinematics(const ChainModel& model, const VecX& q) {
  require(q.size() == model.joint_count(), "forward_kinematics: |q| must equal joint count");
  ChainPose out;
  out.joint_frames.resize(model.joints.size());
  Isometry frame = model.mount;
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    frame = frame * Eigen::Translation3d(j.anchor_offset) * Eigen::AngleAxisd(q[i], j.axis);
    out.joint_frames[i] = frame;
  }
  for (int f = 0; f < 4; ++f)
    out.fingertips.row(f) = link_tip(model, out.joint_frames, model.fingertip_links[f]).transpose();
  out.palm = out.joint_frames[model.palm_link];
  out.palm.translation() = link_tip(model, out.joint_frames, model.palm_link);
  return out;
}

/// Expands actuated-joint targets to a full per-joint target vector,
/// applying couplings and clamping to limits.
inline VecX expand_targets(const ChainModel& model, const VecX& actuated_targets) {
  require(actuated_targets.size() == model.actuated_count(),
          "targets must have one entry per actuated joint");
  VecX full = VecX::Zero(model.joint_count());
  int a = 0;
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    if (j.actuated) full[i] = clamp(actuated_targets[a++], j.lo, j.hi);
  }
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    if (j.coupling) full[i] = j.coupling->k * full[j.coupling->parent_joint_index] + j.coupling->b;
  }
  return full;
}

}  // namespace dexsim
