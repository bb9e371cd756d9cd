#include "dexsim/sim.hpp"

#include <algorithm>

namespace dexsim {

std::string to_string(HandSide side) { return side == HandSide::Left ? "left" : "right"; }

HandSide hand_side_from_string(const std::string& s) {
  if (s == "left") return HandSide::Left;
  if (s == "right") return HandSide::Right;
  throw ConfigError("unknown hand side: " + s);
}

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Cylinder: return "cylinder";
  }
  return "sphere";
}

PrimitiveKind primitive_kind_from_string(const std::string& s) {
  if (s == "sphere") return PrimitiveKind::Sphere;
  if (s == "box") return PrimitiveKind::Box;
  if (s == "cylinder") return PrimitiveKind::Cylinder;
  throw ConfigError("unknown primitive kind: " + s);
}

void Scene::validate() {
  require(!chains.empty() && chains.size() <= 2, "scene must have one or two chains");
  for (auto& chain : chains) {
    chain.validate();
    // coupled joints must stay inside their own limits over the parent range
    for (const auto& j : chain.joints) {
      if (!j.coupling) continue;
      const JointSpec& p = chain.joints[j.coupling->parent_joint_index];
      const double a = j.coupling->k * p.lo + j.coupling->b;
      const double b = j.coupling->k * p.hi + j.coupling->b;
      require(std::min(a, b) >= j.lo - 1e-12 && std::max(a, b) <= j.hi + 1e-12,
              "coupling image must lie within coupled joint limits: " + j.name);
    }
  }
  if (chains.size() == 2)
    require(chains[0].hand_side != chains[1].hand_side, "two chains must have distinct sides");
  for (const auto& obj : objects) obj.validate();
  if (allow_bimanual.size() != objects.size()) allow_bimanual.assign(objects.size(), false);
}

int Scene::chain_index(HandSide side) const {
  for (int i = 0; i < static_cast<int>(chains.size()); ++i)
    if (chains[i].hand_side == side) return i;
  return -1;
}

int Scene::total_joints() const {
  int n = 0;
  for (const auto& c : chains) n += c.joint_count();
  return n;
}

int Scene::total_actuated() const {
  int n = 0;
  for (const auto& c : chains) n += c.actuated_count();
  return n;
}

int Scene::object_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(objects.size()); ++i)
    if (objects[i].name == name) return i;
  return -1;
}

double SimParams::get(const std::string& name, double fallback) const {
  auto it = values.find(name);
  return it == values.end() ? fallback : it->second;
}

namespace {

bool consume(std::map<std::string, double>& left, const std::string& name, double& out) {
  auto it = left.find(name);
  if (it == left.end()) return false;
  out = it->second;
  left.erase(it);
  return true;
}

void require_positive(const std::string& name, double v) {
  if (v <= 0.0) throw ConfigError("sim parameter must be positive: " + name);
}

}  // namespace

void SimParams::apply(Scene& scene) const {
  std::map<std::string, double> left = values;
  for (auto& chain : scene.chains) {
    const std::string side = to_string(chain.hand_side);
    double v = 0.0;
    if (consume(left, side + ".kp_scale", v)) {
      require_positive(side + ".kp_scale", v);
      for (auto& j : chain.joints) j.kp *= v;
    }
    if (consume(left, side + ".kd_scale", v)) {
      require_positive(side + ".kd_scale", v);
      for (auto& j : chain.joints) j.kd *= v;
    }
    if (consume(left, side + ".dry_friction_scale", v)) {
      require_positive(side + ".dry_friction_scale", v);
      for (auto& j : chain.joints) j.dry_friction *= v;
    }
    if (consume(left, side + ".inertia_scale", v)) {
      require_positive(side + ".inertia_scale", v);
      for (auto& j : chain.joints) j.inertia *= v;
    }
    if (consume(left, side + ".limit_offset", v)) {
      for (auto& j : chain.joints) {
        j.lo += v;
        j.hi += v;
      }
    }
    if (consume(left, side + ".hand_friction", v)) require_positive(side + ".hand_friction", v);
    for (auto& j : chain.joints) {
      if (!j.coupling) continue;
      if (consume(left, side + "." + j.name + ".coupling_k", v)) j.coupling->k = v;
      if (consume(left, side + "." + j.name + ".coupling_b", v)) j.coupling->b = v;
    }
  }
  for (auto& obj : scene.objects) {
    double v = 0.0;
    if (consume(left, "object." + obj.name + ".friction", v)) {
      require_positive("object." + obj.name + ".friction", v);
      obj.friction = v;
    }
  }
  if (!left.empty()) throw ConfigError("unresolvable sim parameter: " + left.begin()->first);
}

bool SimState::is_attached(int obj, HandSide hand) const {
  for (const auto& a : attachments[obj])
    if (a.hand == hand) return true;
  return false;
}

Simulator::Simulator(Scene scene, const SimParams& params) : scene_(std::move(scene)) {
  scene_.validate();
  if (!params.empty()) {
    params.apply(scene_);
    scene_.validate();
  }
}

SimState Simulator::initial_state() const {
  SimState s;
  s.q.resize(scene_.chains.size());
  s.qdot.resize(scene_.chains.size());
  for (size_t c = 0; c < scene_.chains.size(); ++c) {
    const ChainModel& chain = scene_.chains[c];
    s.q[c] = VecX::Zero(chain.joint_count());
    s.qdot[c] = VecX::Zero(chain.joint_count());
    for (int i = 0; i < chain.joint_count(); ++i) {
      const JointSpec& j = chain.joints[i];
      s.q[c][i] = clamp(0.0, j.lo, j.hi);
    }
    for (int i = 0; i < chain.joint_count(); ++i) {
      const JointSpec& j = chain.joints[i];
      if (j.coupling)
        s.q[c][i] = j.coupling->k * s.q[c][j.coupling->parent_joint_index] + j.coupling->b;
    }
  }
  s.objects = scene_.objects;
  s.attachments.assign(scene_.objects.size(), {});
  return s;
}

VecX Simulator::split_targets(int chain, const VecX& targets) const {
  int offset = 0;
  for (int c = 0; c < chain; ++c) offset += scene_.chains[c].actuated_count();
  return targets.segment(offset, scene_.chains[chain].actuated_count());
}

VecX Simulator::rest_targets() const {
  VecX t(scene_.total_actuated());
  int k = 0;
  for (const auto& chain : scene_.chains)
    for (const auto& j : chain.joints)
      if (j.actuated) t[k++] = 0.5 * (j.lo + j.hi);
  return t;
}

double Simulator::commanded_closure(int chain, const VecX& targets) const {
  const ChainModel& model = scene_.chains[chain];
  const VecX mine = split_targets(chain, targets);
  double sum = 0.0;
  int n = 0;
  int a = 0;
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    if (!j.actuated) continue;
    if (model.is_finger_joint(i)) {
      const double t = clamp(mine[a], j.lo, j.hi);
      sum += (t - j.lo) / (j.hi - j.lo);
      ++n;
    }
    ++a;
  }
  return n > 0 ? sum / n : 0.0;
}

void Simulator::step_chain(int chain, SimState& state, const VecX& chain_targets,
                           double dt) const {
  const ChainModel& model = scene_.chains[chain];
  require(chain_targets.size() == model.actuated_count(),
          "step: targets must have one entry per actuated joint");
  VecX& q = state.q[chain];
  VecX& qdot = state.qdot[chain];
  int a = 0;
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    if (j.coupling) continue;  // handled after parents integrate
    double target_term = 0.0;
    if (j.actuated) {
      const double target = clamp(chain_targets[a++], j.lo, j.hi);
      target_term = j.kp * (target - q[i]);
    }
    const double torque = target_term - j.kd * qdot[i] - j.dry_friction * sign0(qdot[i]);
    qdot[i] += dt * torque / j.inertia;
    q[i] += dt * qdot[i];
    if (q[i] <= j.lo) {
      q[i] = j.lo;
      qdot[i] = std::max(qdot[i], 0.0);
    } else if (q[i] >= j.hi) {
      q[i] = j.hi;
      qdot[i] = std::min(qdot[i], 0.0);
    }
  }
  for (int i = 0; i < model.joint_count(); ++i) {
    const JointSpec& j = model.joints[i];
    if (!j.coupling) continue;
    q[i] = j.coupling->k * q[j.coupling->parent_joint_index] + j.coupling->b;
    qdot[i] = j.coupling->k * qdot[j.coupling->parent_joint_index];
  }
}

void Simulator::integrate_object(ObjectPrimitive& obj, const Vec3& force, double dt) const {
  const double h = support_height(obj);
  const double rest_z = scene_.ground_height + h;
  const bool resting = obj.position.z() <= rest_z + 1e-9 && obj.linear_velocity.z() <= 0.0;
  obj.linear_velocity += dt * (force / obj.mass);
  if (resting) {
    obj.position.z() = rest_z;
    obj.linear_velocity.z() = 0.0;
    obj.angular_velocity.setZero();
    // Coulomb ground friction resists sliding
    const double speed = obj.linear_velocity.head<2>().norm();
    if (speed > 0.0) {
      const double drop = obj.friction * kGravity * dt;
      const double scale = std::max(0.0, speed - drop) / speed;
      obj.linear_velocity.head<2>() *= scale;
    }
    obj.position += dt * obj.linear_velocity;
  } else {
    obj.linear_velocity.z() -= dt * kGravity;
    obj.position += dt * obj.linear_velocity;
    const Vec3 w = obj.angular_velocity;
    const double angle = w.norm() * dt;
    if (angle > 0.0) {
      obj.orientation = Quat(Eigen::AngleAxisd(angle, w.normalized())) * obj.orientation;
      obj.orientation.normalize();
    }
    const double h_new = support_height(obj);
    if (obj.position.z() < scene_.ground_height + h_new) {
      obj.position.z() = scene_.ground_height + h_new;
      obj.linear_velocity.setZero();
      obj.angular_velocity.setZero();
    }
  }
}

void Simulator::step(SimState& state, const VecX& targets, double dt,
                     const std::vector<Vec3>* object_forces) const {
  require(dt > 0.0, "step: dt must be positive");
  require(targets.size() == scene_.total_actuated(),
          "step: targets must have one entry per actuated joint");
  for (int c = 0; c < static_cast<int>(scene_.chains.size()); ++c)
    step_chain(c, state, split_targets(c, targets), dt);

  std::vector<ChainPose> poses(scene_.chains.size());
  bool have_poses = false;
  for (int o = 0; o < static_cast<int>(state.objects.size()); ++o) {
    ObjectPrimitive& obj = state.objects[o];
    if (!state.attachments[o].empty()) {
      if (!have_poses) {
        for (int c = 0; c < static_cast<int>(scene_.chains.size()); ++c)
          poses[c] = forward_kinematics(scene_.chains[c], state.q[c]);
        have_poses = true;
      }
      Vec3 pos = Vec3::Zero();
      Quat rot = Quat::Identity();
      for (size_t k = 0; k < state.attachments[o].size(); ++k) {
        const Attachment& att = state.attachments[o][k];
        const Isometry target = poses[scene_.chain_index(att.hand)].palm * att.grasp;
        pos += target.translation();
        if (k == 0) rot = Quat(target.linear());
      }
      pos /= static_cast<double>(state.attachments[o].size());
      const Vec3 prev_pos = obj.position;
      const Quat prev_rot = obj.orientation;
      obj.position = pos;
      obj.orientation = rot.normalized();
      obj.linear_velocity = (obj.position - prev_pos) / dt;
      const Eigen::AngleAxisd delta(obj.orientation * prev_rot.conjugate());
      obj.angular_velocity = delta.axis() * (delta.angle() / dt);
    } else {
      const Vec3 f = object_forces ? (*object_forces)[o] : Vec3::Zero();
      integrate_object(obj, f, dt);
    }
  }
  state.t += dt;
  state.step_index += 1;
}

void Simulator::update_attachment(SimState& state, const VecX& targets) const {
  const int num_chains = static_cast<int>(scene_.chains.size());
  std::vector<ChainPose> poses(num_chains);
  std::vector<double> closure(num_chains);
  for (int c = 0; c < num_chains; ++c) {
    poses[c] = forward_kinematics(scene_.chains[c], state.q[c]);
    closure[c] = commanded_closure(c, targets);
  }

  for (int o = 0; o < static_cast<int>(state.objects.size()); ++o) {
    ObjectPrimitive& obj = state.objects[o];
    auto& atts = state.attachments[o];
    // release pass
    atts.erase(std::remove_if(atts.begin(), atts.end(),
                              [&](const Attachment& a) {
                                return closure[scene_.chain_index(a.hand)] <
                                       scene_.attach.open_threshold;
                              }),
               atts.end());

    // contact rule per hand
    struct Candidate {
      int chain;
      double score;  // sum of contacting fingertip distances, ties by index
    };
    std::vector<Candidate> satisfied;
    for (int c = 0; c < num_chains; ++c) {
      std::vector<Vec3> normals;
      double score = 0.0;
      for (int f = 0; f < 4; ++f) {
        const Vec3 tip = poses[c].fingertips.row(f).transpose();
        const double sd = signed_distance(obj, tip);
        if (sd <= scene_.attach.epsilon_contact) {
          normals.push_back(sdf_normal(obj, tip));
          score += std::abs(sd);
        }
      }
      if (normals.size() < 2) continue;
      bool opposing = false;
      for (size_t i = 0; i < normals.size() && !opposing; ++i)
        for (size_t j = i + 1; j < normals.size(); ++j)
          if (normals[i].dot(normals[j]) < scene_.attach.opposition_dot) {
            opposing = true;
            break;
          }
      if (opposing) satisfied.push_back({c, score});
    }

    for (const Candidate& cand : satisfied) {
      const HandSide side = scene_.chains[cand.chain].hand_side;
      if (state.is_attached(o, side)) continue;
      const bool allow_second = scene_.allow_bimanual[o];
      if (!atts.empty() && !allow_second) continue;
      if (atts.size() >= 2) continue;
      Attachment att;
      att.hand = side;
      att.grasp = poses[cand.chain].palm.inverse() * obj.pose();
      atts.push_back(att);
    }
    // exclusive objects contested by both hands in the same update: keep the
    // closer hand (ties broken by chain order, which sorted `satisfied`)
    if (!scene_.allow_bimanual[o] && satisfied.size() == 2 && atts.size() == 1 &&
        state.is_attached(o, scene_.chains[satisfied[0].chain].hand_side) &&
        satisfied[1].score < satisfied[0].score) {
      const int c = satisfied[1].chain;
      Attachment att;
      att.hand = scene_.chains[c].hand_side;
      att.grasp = poses[c].palm.inverse() * obj.pose();
      atts[0] = att;
    }
  }
}

ChainPose Simulator::chain_pose(const SimState& state, int chain) const {
  return forward_kinematics(scene_.chains[chain], state.q[chain]);
}

}  // namespace dexsim
