// Copyright 2025 The rollgrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rollgrasp/scenario.hpp"

#include <Eigen/Geometry>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rollgrasp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) ok = true;
    }
    if (!ok) fail(where, "unknown key '" + item.key() + "'");
  }
}

double number_at(const json& j, const std::string& where, const char* key,
                 double fallback = 0.0, bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(where, std::string("missing key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) fail(where, std::string(key) + " must be a number");
  return j[key].get<double>();
}

Eigen::Vector3d vec3_at(const json& j, const std::string& where,
                        const char* key,
                        const Eigen::Vector3d& fallback,
                        bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(where, std::string("missing key '") + key + "'");
    return fallback;
  }
  const json& v = j[key];
  if (!v.is_array() || v.size() != 3) {
    fail(where, std::string(key) + " must be an array of 3 numbers");
  }
  return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(),
                         v[2].get<double>());
}

Vector6d vec6_at(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 6) {
    fail(where, "expected an array of 6 numbers");
  }
  Vector6d out;
  for (int i = 0; i < 6; ++i) out[i] = v[i].get<double>();
  return out;
}

Transform pose_at(const json& j, const std::string& where, const char* key,
                  const FrameId& from, const FrameId& to,
                  bool required = false) {
  Transform t = Transform::identity(from, to);
  if (!j.contains(key)) {
    if (required) fail(where, std::string("missing key '") + key + "'");
    return t;
  }
  const json& p = j[key];
  check_keys(p, where + "." + key, {"position", "quaternion_wxyz"});
  t.translation = vec3_at(p, where + "." + key, "position",
                          Eigen::Vector3d::Zero());
  if (p.contains("quaternion_wxyz")) {
    const json& q = p["quaternion_wxyz"];
    if (!q.is_array() || q.size() != 4) {
      fail(where, "quaternion_wxyz must be an array of 4 numbers (w x y z)");
    }
    Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(),
                            q[2].get<double>(), q[3].get<double>());
    if (quat.norm() < 1e-9) fail(where, "quaternion has zero norm");
    quat.normalize();
    t.rotation = Rotation::trusted(quat.toRotationMatrix());
  }
  return t;
}

SurfaceModel shape_at(const json& j, const std::string& where,
                      const FrameId& body_frame) {
  check_keys(j, where, {"kind", "radius", "half_length"});
  if (!j.contains("kind")) fail(where, "missing key 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "plane") {
    return SurfaceModel::plane(body_frame);
  }
  if (kind == "sphere") {
    return SurfaceModel::sphere(
        number_at(j, where, "radius", 0.0, true), body_frame);
  }
  if (kind == "cylinder") {
    return SurfaceModel::cylinder(number_at(j, where, "radius", 0.0, true),
                                  number_at(j, where, "half_length", 0.0),
                                  body_frame);
  }
  fail(where, "unknown shape kind '" + kind + "'");
}

StiffnessMatrix stiffness_at(const json& j, const std::string& where,
                             const FrameId& frame) {
  check_keys(j, where, {"rotational", "linear", "matrix"});
  if (j.contains("matrix")) {
    const json& m = j["matrix"];
    if (!m.is_array() || m.size() != 36) {
      fail(where, "stiffness matrix must be an array of 36 numbers");
    }
    Matrix6d k;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) k(r, c) = m[6 * r + c].get<double>();
    return StiffnessMatrix::from_matrix(k, frame);
  }
  const double rot = number_at(j, where, "rotational", 1.0);
  const double lin = number_at(j, where, "linear", 1000.0);
  Vector6d diag;
  diag << rot, rot, rot, lin, lin, lin;
  return StiffnessMatrix::from_matrix(diag.asDiagonal(), frame);
}

Vector6d gain_at(const json& j, const std::string& where, const char* key,
                 double fallback) {
  if (!j.contains(key)) return fallback * Vector6d::Ones();
  const json& g = j[key];
  if (g.is_number()) return g.get<double>() * Vector6d::Ones();
  return vec6_at(g, where + "." + key);
}

void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    fail("--set " + spec, "expected key.path=value");
  }
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  json* node = &doc;
  std::stringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) parts.push_back(key);
  if (parts.empty()) fail("--set " + spec, "empty key path");
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p.size() && p.front() >= '0' && p.front() <= '9' && node->is_array()) {
      node = &(*node)[std::stoul(p)];
    } else {
      node = &(*node)[p];
    }
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // plain string value
  const std::string& last = parts.back();
  if (last.size() && last.front() >= '0' && last.front() <= '9' &&
      node->is_array()) {
    (*node)[std::stoul(last)] = parsed;
  } else {
    (*node)[last] = parsed;
  }
}

Scenario parse_document(json doc, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) apply_override(doc, o);

  check_keys(doc, "scenario", {"name", "object", "fingers", "control", "sim"});
  Scenario s;
  if (doc.contains("name")) s.name = doc["name"].get<std::string>();

  if (!doc.contains("object")) fail("scenario", "missing 'object' block");
  {
    const json& obj = doc["object"];
    check_keys(obj, "object", {"shape", "mass", "pose", "chart_direction"});
    if (!obj.contains("shape")) fail("object", "missing 'shape'");
    s.object.surface = shape_at(obj["shape"], "object.shape", "o");
    if (obj.contains("chart_direction")) {
      const Eigen::Vector3d d =
          vec3_at(obj, "object", "chart_direction", {1, 0, 0});
      s.object.surface = reseat_chart(s.object.surface, d);
    }
    s.object.mass = number_at(obj, "object", "mass", 0.0, true);
    if (s.object.mass <= 0.0) fail("object", "mass must be positive");
    s.object.pose = pose_at(obj, "object", "pose", "w", "o");
  }

  if (!doc.contains("fingers") || !doc["fingers"].is_array() ||
      doc["fingers"].empty()) {
    fail("scenario", "at least one finger block is required");
  }
  int index = 0;
  for (const json& fj : doc["fingers"]) {
    const std::string where = "fingers[" + std::to_string(index) + "]";
    check_keys(fj, where,
               {"name", "fingertip", "chart_direction", "stiffness",
                "anchor_pose", "anchor_to_rest", "chain", "script"});
    FingerModel f;
    f.name = fj.contains("name") ? fj["name"].get<std::string>()
                                 : "f" + std::to_string(index);
    if (!fj.contains("fingertip")) fail(where, "missing 'fingertip'");
    f.fingertip = shape_at(fj["fingertip"], where + ".fingertip",
                           f.tip_frame());
    if (fj.contains("chart_direction")) {
      f.fingertip = reseat_chart(
          f.fingertip, vec3_at(fj, where, "chart_direction", {1, 0, 0}));
    }
    f.stiffness = fj.contains("stiffness")
                      ? stiffness_at(fj["stiffness"], where + ".stiffness",
                                     f.rest_frame())
                      : stiffness_at(json::object(), where, f.rest_frame());
    Transform a2r = pose_at(fj, where, "anchor_to_rest", f.anchor_frame(),
                            f.rest_frame());
    f.anchor_to_rest = a2r;

    Eigen::VectorXd theta0;
    std::vector<ScriptedSegment> script;
    if (fj.contains("chain")) {
      const json& chain = fj["chain"];
      check_keys(chain, where + ".chain",
                 {"screw_axes", "home_pose", "initial_joints"});
      if (!chain.contains("screw_axes")) {
        fail(where + ".chain", "missing 'screw_axes'");
      }
      for (const json& axis : chain["screw_axes"]) {
        f.screw_axes.push_back(vec6_at(axis, where + ".chain.screw_axes"));
      }
      f.home_pose = pose_at(chain, where + ".chain", "home_pose", "w",
                            f.anchor_frame(), true);
      theta0 = Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(f.screw_axes.size()));
      if (chain.contains("initial_joints")) {
        const json& init = chain["initial_joints"];
        if (init.size() != f.screw_axes.size()) {
          fail(where + ".chain", "initial_joints size mismatch");
        }
        for (size_t k = 0; k < f.screw_axes.size(); ++k) {
          theta0[static_cast<Eigen::Index>(k)] = init[k].get<double>();
        }
      }
    } else if (fj.contains("anchor_pose")) {
      f.home_pose =
          pose_at(fj, where, "anchor_pose", "w", f.anchor_frame(), true);
    } else {
      fail(where, "either 'chain' or 'anchor_pose' is required");
    }
    if (fj.contains("script")) {
      for (const json& seg : fj["script"]) {
        check_keys(seg, where + ".script", {"t_start", "t_end", "twist"});
        ScriptedSegment segment;
        segment.t_start = number_at(seg, where, "t_start", 0.0);
        segment.t_end = number_at(seg, where, "t_end", 0.0, true);
        if (!seg.contains("twist")) fail(where + ".script", "missing twist");
        segment.twist = vec6_at(seg["twist"], where + ".script.twist");
        script.push_back(segment);
      }
    }
    s.hand.push_back(f);
    s.initial_joints.push_back(theta0);
    s.scripts.push_back(script);
    ++index;
  }

  if (doc.contains("control")) {
    const json& c = doc["control"];
    check_keys(c, "control",
               {"mode", "use_qp", "gains", "joint_velocity_bound", "target"});
    const std::string mode =
        c.contains("mode") ? c["mode"].get<std::string>() : "scripted";
    if (mode == "closed_loop") {
      s.closed_loop = true;
    } else if (mode != "scripted") {
      fail("control", "mode must be 'scripted' or 'closed_loop'");
    }
    if (c.contains("use_qp")) s.controller.use_qp = c["use_qp"].get<bool>();
    if (c.contains("gains")) {
      const json& g = c["gains"];
      check_keys(g, "control.gains", {"kp", "ki", "anti_windup"});
      s.controller.kp = gain_at(g, "control.gains", "kp", 1.0);
      s.controller.ki = gain_at(g, "control.gains", "ki", 0.1);
      s.controller.anti_windup =
          number_at(g, "control.gains", "anti_windup", 0.1);
    }
    s.controller.joint_velocity_bound =
        number_at(c, "control", "joint_velocity_bound", 2.0);
    if (c.contains("target")) {
      const json& t = c["target"];
      check_keys(t, "control.target",
                 {"type", "axis_point", "axis_direction", "angle_deg",
                  "move_duration"});
      const std::string type =
          t.contains("type") ? t["type"].get<std::string>()
                             : "rotate_about_axis";
      if (type != "rotate_about_axis") {
        fail("control.target", "unknown target type '" + type + "'");
      }
      s.target.axis_point =
          vec3_at(t, "control.target", "axis_point", {0, 0, 0});
      s.target.axis_direction =
          vec3_at(t, "control.target", "axis_direction", {0, 0, 1});
      s.target.angle =
          number_at(t, "control.target", "angle_deg", 0.0, true) * M_PI /
          180.0;
      s.target.move_duration =
          number_at(t, "control.target", "move_duration", 0.0, true);
    }
  }

  if (!doc.contains("sim")) fail("scenario", "missing 'sim' block");
  {
    const json& sim = doc["sim"];
    check_keys(sim, "sim",
               {"dt", "duration", "gravity", "friction", "soft_friction",
                "object_constraint", "report_axis", "tolerances",
                "seed_ramp_steps"});
    s.dt = number_at(sim, "sim", "dt", 1e-3);
    s.duration = number_at(sim, "sim", "duration", 0.0, true);
    if (s.duration <= 0.0 || s.dt <= 0.0) {
      fail("sim", "duration and dt must be positive");
    }
    s.gravity = vec3_at(sim, "sim", "gravity", {0, 0, -9.81});
    if (sim.contains("friction")) {
      const json& fr = sim["friction"];
      check_keys(fr, "sim.friction", {"mu", "mu_max", "f_min"});
      s.friction.mu = number_at(fr, "sim.friction", "mu", 1.0);
      s.friction.mu_max = number_at(fr, "sim.friction", "mu_max",
                                    0.8 * s.friction.mu);
      s.friction.f_min = number_at(fr, "sim.friction", "f_min", 0.5);
    }
    if (sim.contains("soft_friction")) {
      s.soft_friction = sim["soft_friction"].get<bool>();
    }
    if (sim.contains("object_constraint")) {
      const json& oc = sim["object_constraint"];
      check_keys(oc, "sim.object_constraint", {"type", "point", "direction"});
      const std::string type = oc.contains("type")
                                   ? oc["type"].get<std::string>()
                                   : "free";
      if (type == "axis") {
        ObjectAxisConstraint constraint;
        constraint.point =
            vec3_at(oc, "sim.object_constraint", "point", {0, 0, 0});
        constraint.direction =
            vec3_at(oc, "sim.object_constraint", "direction", {0, 0, 1});
        s.object_constraint = constraint;
      } else if (type != "free") {
        fail("sim.object_constraint", "type must be 'free' or 'axis'");
      }
    }
    s.report_axis = vec3_at(sim, "sim", "report_axis", {0, 0, 1});
    if (sim.contains("tolerances")) {
      const json& tol = sim["tolerances"];
      check_keys(tol, "sim.tolerances",
                 {"gap", "equilibrium", "moment_free", "state_validity"});
      s.tolerances.gap = number_at(tol, "sim.tolerances", "gap", 1e-6);
      s.tolerances.equilibrium =
          number_at(tol, "sim.tolerances", "equilibrium", 1e-3);
      s.tolerances.moment_free =
          number_at(tol, "sim.tolerances", "moment_free", 1e-6);
      s.tolerances.state_validity =
          number_at(tol, "sim.tolerances", "state_validity", 1e-6);
    }
    s.seed_ramp_steps = static_cast<int>(
        number_at(sim, "sim", "seed_ramp_steps", 200));
  }

  // Cross-field validation.
  for (size_t i = 0; i < s.hand.size(); ++i) {
    if (!s.scripts[i].empty() && !s.hand[i].screw_axes.empty()) {
      fail("fingers[" + std::to_string(i) + "]",
           "scripted twists require a jointless finger");
    }
    if (s.closed_loop && s.hand[i].screw_axes.empty()) {
      fail("fingers[" + std::to_string(i) + "]",
           "closed-loop control requires a joint chain");
    }
  }
  return s;
}

int line_of_offset(const std::string& text, size_t offset) {
  int line = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

void append_pose(std::string& row, const Transform& t) {
  const Eigen::Quaterniond q(t.rotation.matrix());
  // Canonical sign: nonnegative w keeps exports byte-stable.
  const double sign = (q.w() < 0.0) ? -1.0 : 1.0;
  row += "," + format_double(sign * q.w()) + "," + format_double(sign * q.x()) +
         "," + format_double(sign * q.y()) + "," + format_double(sign * q.z());
  for (int i = 0; i < 3; ++i) row += "," + format_double(t.translation[i]);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text,
                             const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    fail("line " + std::to_string(line_of_offset(text, err.byte)),
         err.what());
  }
  return parse_document(std::move(doc), overrides);
}

Scenario load_scenario_file(const std::string& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario_text(buffer.str(), overrides);
  } catch (const ParseError& err) {
    throw ParseError(path + ": " + err.what());
  }
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::string out;
  out += "t,obj_qw,obj_qx,obj_qy,obj_qz,obj_x,obj_y,obj_z";
  for (int i = 0; i < record.finger_count; ++i) {
    const std::string p = "f" + std::to_string(i) + "_";
    for (const char* frame : {"anchor", "tip"}) {
      out += "," + p + frame + "_qw," + p + frame + "_qx," + p + frame +
             "_qy," + p + frame + "_qz," + p + frame + "_x," + p + frame +
             "_y," + p + frame + "_z";
    }
    out += "," + p + "contact_x," + p + "contact_y," + p + "contact_z";
    out += "," + p + "normal_force," + p + "tangential_force";
  }
  out += ",residual,sigma_min\n";

  for (const StepRecord& step : record.steps) {
    std::string row = format_double(step.t);
    // object pose appended with a leading comma by append_pose
    std::string pose_part;
    append_pose(pose_part, step.object_pose);
    row += pose_part;
    for (const FingerStepRecord& f : step.fingers) {
      append_pose(row, f.anchor_pose);
      append_pose(row, f.fingertip_pose);
      for (int i = 0; i < 3; ++i) row += "," + format_double(f.contact_point[i]);
      row += "," + format_double(f.normal_force);
      row += "," + format_double(f.tangential_force);
    }
    row += "," + format_double(step.equilibrium_residual);
    row += "," + format_double(step.sigma_min);
    out += row + "\n";
  }
  return out;
}

void write_trajectory_csv(const TrajectoryRecord& record,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write trajectory file '" + path + "'");
  out << trajectory_csv(record);
}

std::string events_json(const TrajectoryRecord& record) {
  json events = json::array();
  for (const SimEvent& e : record.events) {
    events.push_back({{"kind", to_string(e.kind)},
                      {"time", e.time},
                      {"finger", e.finger},
                      {"detail", e.detail}});
  }
  return events.dump(2) + "\n";
}

void write_events_json(const TrajectoryRecord& record,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write events file '" + path + "'");
  out << events_json(record);
}

std::string summary_json(const TrajectoryRecord& record,
                         const RefinementStudy* study) {
  const RunSummary& s = record.summary;
  json j{{"completed", s.completed},
         {"valid", s.valid},
         {"invalid_reason", s.invalid_reason},
         {"exit_code", s.exit_code},
         {"final_time", s.final_time},
         {"rotation_angle_rad", s.rotation_angle},
         {"rotation_angle_deg", s.rotation_angle * 180.0 / M_PI},
         {"center_displacement", s.center_displacement},
         {"max_equilibrium_residual", s.max_equilibrium_residual},
         {"max_reprojection_gap", s.max_reprojection_gap},
         {"max_moment_residual", s.max_moment_residual},
         {"tracking_error_at_move_end_rad", s.tracking_error_at_move_end},
         {"hold_drift_rad", s.hold_drift},
         {"min_normal_force", s.min_normal_force},
         {"max_normal_force", s.max_normal_force},
         {"max_flexure_disp", s.max_flexure_disp},
         {"arc_length_mismatch", s.arc_length_mismatch},
         {"energy_balance_error", s.energy_balance_error},
         {"axis_deviation_rad", s.axis_deviation},
         {"sigma_jump_flagged", s.sigma_jump_flagged}};
  if (study) {
    j["refinement_study"] = {
        {"dt", study->dts},
        {"max_equilibrium_residual", study->max_equilibrium_residuals},
        {"max_reprojection_gap", study->max_reprojection_gaps},
        {"max_moment_residual", study->max_moment_residuals}};
  }
  return j.dump(2) + "\n";
}

void write_summary_json(const TrajectoryRecord& record,
                        const RefinementStudy* study,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write summary file '" + path + "'");
  out << summary_json(record, study);
}

}  // namespace rollgrasp
