#pragma once

#include "dexsim/chain.hpp"
#include "dexsim/primitives.hpp"

#include <map>
#include <optional>

namespace dexsim {

constexpr double kGravity = 9.81;     // m/s^2
constexpr double kSimDt = 1.0 / 120;  // s, physics substep

/// Thresholds for the kinematic grasp rule.
struct AttachmentConfig {
  double epsilon_contact = 0.01;  // m, fingertip-to-surface distance
  double opposition_dot = -0.5;   // max normal dot product for an opposing pair
  double open_threshold = 0.25;   // commanded closure below which a hand releases
};

/// A scene is the full simulated world: one or two chains plus objects.
struct Scene {
  std::vector<ChainModel> chains;
  std::vector<ObjectPrimitive> objects;
  double ground_height = 0.0;
  AttachmentConfig attach;
  std::vector<bool> allow_bimanual;  // per object; sized on validate

  void validate();
  int chain_index(HandSide side) const;
  int total_joints() const;
  int total_actuated() const;
  int object_index(const std::string& name) const;
};

/// Named scalar overrides applied on top of a base scene. Covers per-chain
/// global scales (kp, kd, dry_friction, inertia), per-coupled-joint (k, b),
/// hand/object friction, and per-chain joint-limit offsets.
///
/// Names: "<side>.kp_scale", "<side>.kd_scale", "<side>.dry_friction_scale",
/// "<side>.inertia_scale", "<side>.limit_offset", "<side>.hand_friction",
/// "<side>.<joint_name>.coupling_k", "<side>.<joint_name>.coupling_b",
/// "object.<name>.friction".
struct SimParams {
  std::map<std::string, double> values;

  bool empty() const { return values.empty(); }
  double get(const std::string& name, double fallback) const;
  /// Applies every entry; throws ConfigError on unresolvable names or
  /// non-positive scale values.
  void apply(Scene& scene) const;
};

struct Attachment {
  HandSide hand = HandSide::Right;
  Isometry grasp = Isometry::Identity();  // object pose = palm * grasp
};

struct SimState {
  std::vector<VecX> q;     // per chain, rad
  std::vector<VecX> qdot;  // per chain, rad/s
  std::vector<ObjectPrimitive> objects;
  std::vector<std::vector<Attachment>> attachments;  // per object
  double t = 0.0;
  long step_index = 0;

  bool is_attached(int obj, HandSide hand) const;
  bool is_attached(int obj) const { return !attachments[obj].empty(); }
};

/// Deterministic stepper over a fixed scene + parameter overrides.
///
/// Dynamics are decoupled per joint: PD torque with dry friction integrated
/// semi-implicitly, couplings enforced kinematically, objects either resting
/// on the ground plane, ballistic, or rigidly following a grasping palm.
class Simulator {
 public:
  explicit Simulator(Scene scene, const SimParams& params = {});

  const Scene& scene() const { return scene_; }

  SimState initial_state() const;

  /// One physics substep. targets holds one entry per actuated joint,
  /// chains concatenated in scene order; object_forces (N, world frame,
  /// applied at the center of mass) may be null.
  void step(SimState& state, const VecX& targets, double dt,
            const std::vector<Vec3>* object_forces = nullptr) const;

  /// Re-evaluates the grasp rule: attach on >=2 fingertip contacts with an
  /// opposing-normal pair, detach when the hand's commanded closure opens.
  void update_attachment(SimState& state, const VecX& targets) const;

  ChainPose chain_pose(const SimState& state, int chain) const;

  /// Mean commanded closure of a hand's finger joints, 0 (open) to 1 (closed).
  double commanded_closure(int chain, const VecX& targets) const;

  VecX split_targets(int chain, const VecX& targets) const;

  /// Joint-limit midpoints of all actuated joints (a valid rest command).
  VecX rest_targets() const;

 private:
  void step_chain(int chain, SimState& state, const VecX& chain_targets, double dt) const;
  void integrate_object(ObjectPrimitive& obj, const Vec3& force, double dt) const;

  Scene scene_;
};

}  // namespace dexsim
