// Copyright 2026 The Rolling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Scenario documents: JSON, SI units, angles in radians. Every malformed or
// unresolvable field raises InputError naming its path, e.g.
// "scenario.object.inertia: missing required field".

#ifndef ROLLING_SCENARIO_HPP_
#define ROLLING_SCENARIO_HPP_

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rolling/control.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/errors.hpp"
#include "rolling/oracles.hpp"
#include "rolling/planner.hpp"

namespace rolling {

using nlohmann::json;

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw InputError(path + ": " + msg);
}

inline const char* type_name(const json& j) { return j.type_name(); }

// A JSON value together with its location in the document.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& value() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
  Node at(const std::string& key) const {
    require_object();
    if (!j_->contains(key)) fail(path_ + "." + key, "missing required field");
    return {(*j_)[key], path_ + "." + key};
  }
  Node at(size_t i) const {
    require_array();
    if (i >= j_->size()) fail(path_, "index out of range");
    return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"};
  }
  std::optional<Node> find(const std::string& key) const {
    require_object();
    if (!j_->contains(key)) return std::nullopt;
    return Node((*j_)[key], path_ + "." + key);
  }
  size_t size() const {
    require_array();
    return j_->size();
  }

  void require_object() const {
    if (!j_->is_object()) fail(path_, std::string("expected an object, got ") + type_name(*j_));
  }
  void require_array() const {
    if (!j_->is_array()) fail(path_, std::string("expected an array, got ") + type_name(*j_));
  }

  double number() const {
    if (!j_->is_number()) fail(path_, std::string("expected a number, got ") + type_name(*j_));
    const double x = j_->get<double>();
    if (!std::isfinite(x)) fail(path_, "must be finite");
    return x;
  }
  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail(path_, "must be positive");
    return x;
  }
  double non_negative() const {
    const double x = number();
    if (!(x >= 0.0)) fail(path_, "must be non-negative");
    return x;
  }
  int integer() const {
    if (!j_->is_number_integer()) fail(path_, std::string("expected an integer, got ") + type_name(*j_));
    return j_->get<int>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail(path_, std::string("expected a boolean, got ") + type_name(*j_));
    return j_->get<bool>();
  }
  std::string string() const {
    if (!j_->is_string()) fail(path_, std::string("expected a string, got ") + type_name(*j_));
    return j_->get<std::string>();
  }
  VecX vector() const {
    require_array();
    VecX v(static_cast<Eigen::Index>(j_->size()));
    for (size_t i = 0; i < j_->size(); ++i) v(static_cast<Eigen::Index>(i)) = at(i).number();
    return v;
  }
  VecX vector(Eigen::Index n) const {
    const VecX v = vector();
    if (v.size() != n) {
      fail(path_, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    }
    return v;
  }
  std::vector<int> indices(int upper) const {
    require_array();
    std::vector<int> out;
    for (size_t i = 0; i < j_->size(); ++i) {
      const int k = at(i).integer();
      if (k < 0 || k >= upper) fail(at(i).path(), "index must lie in [0, " + std::to_string(upper) + ")");
      out.push_back(k);
    }
    return out;
  }

  double number_or(const std::string& key, double fallback) const {
    const auto n = find(key);
    return n ? n->number() : fallback;
  }
  double positive_or(const std::string& key, double fallback) const {
    const auto n = find(key);
    return n ? n->positive() : fallback;
  }
  int integer_or(const std::string& key, int fallback) const {
    const auto n = find(key);
    return n ? n->integer() : fallback;
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    const auto n = find(key);
    return n ? n->boolean() : fallback;
  }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    const auto n = find(key);
    return n ? n->string() : fallback;
  }
  VecX vector_or(const std::string& key, const VecX& fallback) const {
    const auto n = find(key);
    return n ? n->vector(fallback.size()) : fallback;
  }

  // Square matrix: a list of n numbers (diagonal), an n x n nested list, or
  // {"diag": [...], "scale": s}.
  MatX matrix(Eigen::Index n) const {
    if (j_->is_object()) {
      const double s = number_or("scale", 1.0);
      return s * MatX(at("diag").vector(n).asDiagonal());
    }
    require_array();
    if (j_->size() != static_cast<size_t>(n)) {
      fail(path_, "expected " + std::to_string(n) + " rows, got " + std::to_string(j_->size()));
    }
    if (n > 0 && (*j_)[0].is_array()) {
      MatX m(n, n);
      for (Eigen::Index r = 0; r < n; ++r) m.row(r) = at(static_cast<size_t>(r)).vector(n).transpose();
      return m;
    }
    return MatX(vector(n).asDiagonal());
  }

 private:
  const json* j_;
  std::string path_;
};

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

}  // namespace scenario_detail

struct ChartSpec {
  std::string type;  // plane | sphere | ellipsoid
  double radius = 0.0;
  Vec3 semi_axes = Vec3::Zero();
  bool inward = false;
  double margin = kDefaultSingularityMargin;

  ChartPtr build() const {
    if (type == "plane") return make_plane();
    if (type == "sphere") return make_sphere(radius, margin);
    return make_ellipsoid(semi_axes, inward, margin);
  }
};

// Ball on a spinning (optionally tilted) plate; the state is derived from
// these values.
struct TurntableSpec {
  double omega_plate = 0.0;
  Vec2 ball_velocity = Vec2::Zero();
  double tilt = 0.0;
  double radius = 0.0;
};

struct ControlProgram {
  enum class Kind { kZero, kConstant, kTable, kPlan };
  Kind kind = Kind::kZero;
  Vec6 accel = Vec6::Zero();
  KnotTrajectory table;  // piecewise-linear controls (kTable, kPlan)
  std::string plan_file;

  ControlLaw law() const {
    switch (kind) {
      case Kind::kZero:
        return zero_control();
      case Kind::kConstant: {
        const Vec6 a = accel;
        return [a](double, const StateVector&) { return a; };
      }
      default:
        return table.control_law();
    }
  }
};

struct ValidateSpec {
  std::string oracle;  // turntable_orbit | turntable_drift | energy | spin | consistency
  double tolerance = 0.0;  // pass threshold of the oracle's headline metric
};

// Headline metrics: orbit radius divergence (percent), relative drift-speed
// error, relative energy drift, max |omega_z| (rad/s), max consistency
// residual.
inline double default_oracle_tolerance(const std::string& oracle) {
  if (oracle == "turntable_orbit") return 5e-6;
  if (oracle == "turntable_drift") return 0.02;
  if (oracle == "consistency") return 1e-8;
  return 1e-6;
}

struct PlanSpec {
  CollocationProblem problem;
  CostWeights weights;
  IdcOptions idc;
};

struct StabilizeSpec {
  std::string source = "plan";  // plan | plan_file
  std::string plan_file;
  std::string use = "coarse";   // coarse | fine
  std::array<bool, 6> active{true, true, true, true, true, true};
  LqrWeights weights;
  RiccatiOptions riccati;
  double perturbation = 0.0;  // sigma of a random hand-point offset rolled into s0 (m)
};

struct Scenario {
  std::string name;
  std::string description;
  std::string task;  // simulate | validate | plan | stabilize
  ChartSpec object_chart, hand_chart;
  RollingSystem system;
  RollingState initial;
  std::optional<TurntableSpec> turntable;
  ControlProgram control;
  double t_f = 1.0;
  SimulationOptions simulation;
  std::optional<ValidateSpec> validate;
  std::optional<PlanSpec> plan;
  std::optional<StabilizeSpec> stabilize;
  std::filesystem::path base_dir;
  json source;
};

namespace scenario_detail {

inline ChartSpec parse_chart(const Node& n) {
  ChartSpec c;
  c.type = n.at("type").string();
  c.margin = n.positive_or("margin", kDefaultSingularityMargin);
  if (c.type == "plane") return c;
  if (c.type == "sphere") {
    c.radius = n.at("radius").positive();
  } else if (c.type == "ellipsoid") {
    const Node ax = n.at("semi_axes");
    c.semi_axes = ax.vector(3);
    for (int i = 0; i < 3; ++i) {
      if (!(c.semi_axes(i) > 0.0)) fail(ax.at(static_cast<size_t>(i)).path(), "must be positive");
    }
    c.inward = n.boolean_or("inward", false);
  } else {
    fail(n.at("type").path(), "unknown chart type '" + c.type + "' (plane, sphere, ellipsoid)");
  }
  with_path(n.path(), [&] { return c.build(); });
  return c;
}

inline FrictionModel parse_friction(const Node& n, SpinAccelRule& rule) {
  FrictionModel f;
  const std::string mode = n.string_or("mode", "rolling");
  if (mode == "rolling") {
    f.mode = FrictionMode::kRolling;
  } else if (mode == "pure_rolling") {
    f.mode = FrictionMode::kPureRolling;
  } else {
    fail(n.at("mode").path(), "unknown friction mode '" + mode + "' (rolling, pure_rolling)");
  }
  if (const auto m = n.find("mu_s")) f.mu_s = m->non_negative();
  if (const auto m = n.find("mu_spin")) f.mu_spin = m->non_negative();
  const std::string r = n.string_or("spin_accel_rule", "closed_form");
  if (r == "closed_form") {
    rule = SpinAccelRule::kClosedForm;
  } else if (r == "zero") {
    rule = SpinAccelRule::kZero;
  } else {
    fail(n.at("spin_accel_rule").path(), "unknown rule '" + r + "' (closed_form, zero)");
  }
  return f;
}

inline void parse_initial(const Node& n, Scenario& sc) {
  if (const auto tt = n.find("turntable")) {
    if (sc.object_chart.type != "sphere" || sc.hand_chart.type != "plane") {
      fail(tt->path(), "requires a sphere object on a plane hand");
    }
    TurntableSpec t;
    t.omega_plate = tt->at("omega_plate").number();
    t.ball_velocity = tt->at("ball_velocity").vector(2);
    t.tilt = tt->number_or("tilt", 0.0);
    t.radius = sc.object_chart.radius;
    sc.turntable = t;
    sc.initial = turntable_state(t.radius, t.omega_plate, t.ball_velocity, t.tilt);
    return;
  }
  RollingState s;
  s.rpy = EulerRPY::from_vector(n.vector_or("rpy", Vec3::Zero()));
  s.r_sh = n.vector_or("r_sh", Vec3::Zero());
  const Node q = n.at("q");
  s.q = ContactConfig::from_vector(q.vector(5));
  s.V_h = n.vector_or("V_h", Vec6::Zero());
  const ContactPair pair = sc.system.pair();
  const ContactGeometry g = with_path(q.path(), [&] { return contact_geometry(pair, s.q); });
  if (n.has("qdot") && n.has("omega_rel")) fail(n.path(), "give either qdot or omega_rel, not both");
  if (const auto qd = n.find("qdot")) {
    s.qdot = qd->vector(5);
    if (recover_omega(g, s.qdot).residual > 1e-8) {
      fail(qd->path(), "violates the rolling consistency constraint");
    }
  } else if (const auto w = n.find("omega_rel")) {
    s.qdot = first_order_qdot(g, Vec3(w->vector(3)));
  }
  if (sc.system.friction.mode == FrictionMode::kPureRolling &&
      std::abs(recover_omega(g, s.qdot).omega(2)) > 1e-8) {
    fail(n.path(), "pure rolling requires zero relative spin");
  }
  sc.initial = s;
}

inline KnotTrajectory read_plan_file(const std::filesystem::path& file, const std::string& use,
                                     const std::string& path) {
  std::ifstream in(file);
  if (!in) fail(path, "cannot open plan file '" + file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(path, "plan file '" + file.string() + "' is not valid JSON: " + e.what());
  }
  const Node root(j, file.filename().string());
  const Node rows = root.at(use);
  KnotTrajectory k;
  const Eigen::Index width = 1 + kStateDim + 6;
  for (size_t r = 0; r < rows.size(); ++r) {
    const VecX row = rows.at(r).vector().head(std::min<Eigen::Index>(width, rows.at(r).vector().size()));
    if (row.size() < width) fail(rows.at(r).path(), "row too short");
    if (!k.t.empty() && !(row(0) > k.t.back())) fail(rows.at(r).path(), "times must increase");
    k.t.push_back(row(0));
    k.s.push_back(row.segment(1, kStateDim));
    k.u.push_back(row.segment(1 + kStateDim, 6));
  }
  if (k.t.size() < 2) fail(rows.path(), "need at least two rows");
  return k;
}

inline ControlProgram parse_control(const Node& n, const std::filesystem::path& base) {
  ControlProgram c;
  const std::string type = n.at("type").string();
  if (type == "zero") {
    c.kind = ControlProgram::Kind::kZero;
  } else if (type == "constant") {
    c.kind = ControlProgram::Kind::kConstant;
    c.accel = n.at("accel").vector(6);
  } else if (type == "table") {
    c.kind = ControlProgram::Kind::kTable;
    const Node times = n.at("times"), accels = n.at("accels");
    if (times.size() != accels.size() || times.size() < 1) {
      fail(n.path(), "times and accels must be non-empty and of equal length");
    }
    for (size_t i = 0; i < times.size(); ++i) {
      const double t = times.at(i).number();
      if (!c.table.t.empty() && !(t > c.table.t.back())) fail(times.at(i).path(), "times must increase");
      c.table.t.push_back(t);
      c.table.s.push_back(StateVector::Zero());
      c.table.u.push_back(accels.at(i).vector(6));
    }
  } else if (type == "plan") {
    c.kind = ControlProgram::Kind::kPlan;
    const Node f = n.at("file");
    c.plan_file = f.string();
    c.table = read_plan_file(base / c.plan_file, n.string_or("use", "coarse"), f.path());
  } else {
    fail(n.at("type").path(), "unknown control type '" + type + "' (zero, constant, table, plan)");
  }
  return c;
}

inline void parse_simulation(const Node& n, Scenario& sc) {
  sc.t_f = n.at("t_f").positive();
  IntegratorOptions& io = sc.simulation.integrator;
  io.rel_tol = n.positive_or("rel_tol", io.rel_tol);
  io.abs_tol = n.positive_or("abs_tol", io.abs_tol);
  if (const auto m = n.find("max_step")) io.max_step = m->positive();
  if (const auto d = n.find("sample_dt")) sc.simulation.sample_dt = d->number();
  sc.simulation.project = n.boolean_or("project", true);
  sc.simulation.halt_on_invalid = n.boolean_or("halt_on_invalid", true);
}

inline std::array<bool, 6> parse_mask(const Node& n) {
  std::array<bool, 6> mask{};
  for (int i : n.indices(6)) mask[i] = true;
  return mask;
}

inline Vec6 bound_vector(const Node& n) {
  if (n.value().is_number()) return Vec6::Constant(n.number());
  return n.vector(6);
}

inline PlanSpec parse_plan(const Node& n, const Scenario& sc) {
  PlanSpec p;
  CollocationProblem& pr = p.problem;
  pr.system = sc.system;
  pr.segments = n.integer_or("segments", pr.segments);
  if (pr.segments < 1) fail(n.at("segments").path(), "must be at least 1");
  pr.t_f = n.positive_or("t_f", pr.t_f);
  pr.s_start = sc.initial.to_vector();
  const Node goal = n.at("goal");
  if (const auto d = goal.find("roll_to_hand_point")) {
    RollingState g = sc.initial;
    g.q = with_path(d->path(), [&] { return roll_to_hand_point(sc.system.pair(), sc.initial.q, d->vector(2)); });
    pr.s_goal = g.to_vector();
  } else if (const auto r = goal.find("reorient")) {
    // {"hand_point": [u, v], "object_rotation": [rx, ry, rz]}, rotation vector in hand coordinates.
    RollingState g = sc.initial;
    const Vec2 target = r->at("hand_point").vector(2);
    const Vec3 rot = r->at("object_rotation").vector(3);
    g.q = with_path(r->path(), [&] { return reorient_contact(sc.system.pair(), sc.initial.q, target, rot); });
    pr.s_goal = g.to_vector();
  } else if (const auto s = goal.find("state")) {
    pr.s_goal = s->vector(kStateDim);
  } else {
    fail(goal.path(), "expected 'roll_to_hand_point', 'reorient' or 'state'");
  }
  if (const auto a = n.find("active_controls")) pr.active = parse_mask(*a);
  if (const auto b = n.find("u_min")) pr.u_min = bound_vector(*b);
  if (const auto b = n.find("u_max")) pr.u_max = bound_vector(*b);
  if (const auto f = n.find("frozen_states")) pr.frozen = f->indices(kStateDim);
  pr.friction_constraints = n.boolean_or("friction_constraints", true);
  if (const auto c = n.find("domain_clearance")) pr.domain_clearance = c->non_negative();
  with_path(n.path(), [&] {
    pr.validate();
    return 0;
  });
  const Node w = n.at("weights");
  const Eigen::Index nu = static_cast<Eigen::Index>(pr.active_controls().size());
  p.weights.P1 = w.at("P1").matrix(kStateDim);
  p.weights.Q = w.at("Q").matrix(kStateDim);
  p.weights.R = w.at("R").matrix(nu);
  with_path(w.path(), [&] {
    p.weights.validate(nu);
    return 0;
  });
  p.idc.fine = sc.simulation;
  if (const auto idc = n.find("idc")) {
    p.idc.eta = idc->positive_or("eta", p.idc.eta);
    p.idc.max_iters = idc->integer_or("max_iters", p.idc.max_iters);
    if (p.idc.max_iters < 1) fail(idc->at("max_iters").path(), "must be at least 1");
    p.idc.nlp.feasibility_tol = idc->positive_or("feasibility_tol", p.idc.nlp.feasibility_tol);
    p.idc.nlp.optimality_tol = idc->positive_or("optimality_tol", p.idc.nlp.optimality_tol);
    if (const auto m = idc->find("max_func_evals")) p.idc.nlp.max_func_evals = static_cast<long>(m->positive());
    p.idc.relax_friction_first = idc->boolean_or("relax_friction_first", p.idc.relax_friction_first);
    p.idc.zero_q_after_first = idc->boolean_or("zero_q_after_first", p.idc.zero_q_after_first);
  }
  return p;
}

inline StabilizeSpec parse_stabilize(const Node& n, const Scenario& sc) {
  StabilizeSpec st;
  const Node nom = n.at("nominal");
  st.source = nom.string_or("source", "plan");
  st.use = nom.string_or("use", "coarse");
  if (st.use != "coarse" && st.use != "fine") fail(nom.at("use").path(), "expected 'coarse' or 'fine'");
  if (st.source == "plan") {
    if (!sc.plan) fail(nom.path(), "source 'plan' needs a plan section");
  } else if (st.source == "plan_file") {
    const Node f = nom.at("file");
    st.plan_file = f.string();
    if (!std::filesystem::exists(sc.base_dir / st.plan_file)) {
      fail(f.path(), "plan file '" + st.plan_file + "' not found");
    }
  } else {
    fail(nom.at("source").path(), "unknown source '" + st.source + "' (plan, plan_file)");
  }
  std::array<bool, 6> mask = sc.plan ? sc.plan->problem.active : std::array<bool, 6>{true, true, true, true, true, true};
  if (const auto a = n.find("active_controls")) mask = parse_mask(*a);
  st.active = mask;
  const Eigen::Index nu = static_cast<Eigen::Index>(active_indices(mask).size());
  const Node w = n.at("weights");
  st.weights.P1 = w.at("P1").matrix(kStateDim);
  st.weights.Q = w.at("Q").matrix(kStateDim);
  st.weights.R = w.at("R").matrix(nu);
  with_path(w.path(), [&] {
    st.weights.validate(kStateDim, nu);
    return 0;
  });
  if (const auto r = n.find("riccati")) {
    st.riccati.integrator.rel_tol = r->positive_or("rel_tol", st.riccati.integrator.rel_tol);
    st.riccati.integrator.abs_tol = r->positive_or("abs_tol", st.riccati.integrator.abs_tol);
    st.riccati.sample_dt = r->positive_or("sample_dt", st.riccati.sample_dt);
  }
  if (const auto p = n.find("perturbation")) st.perturbation = p->non_negative();
  return st;
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir = ".") {
  using namespace scenario_detail;
  const Node root(doc, "scenario");
  root.require_object();
  Scenario sc;
  sc.source = doc;
  sc.base_dir = base_dir;
  sc.name = root.string_or("name", "unnamed");
  sc.description = root.string_or("description", "");
  sc.task = root.string_or("task", "simulate");
  if (sc.task != "simulate" && sc.task != "validate" && sc.task != "plan" && sc.task != "stabilize") {
    fail("scenario.task", "unknown task '" + sc.task + "' (simulate, validate, plan, stabilize)");
  }

  const Node obj = root.at("object");
  sc.object_chart = parse_chart(obj.at("chart"));
  sc.system.object.chart = sc.object_chart.build();
  sc.system.object.mass = obj.at("mass").positive();
  const Node inertia = obj.at("inertia");
  sc.system.object.inertia = inertia.vector(3);
  for (int i = 0; i < 3; ++i) {
    if (!(sc.system.object.inertia(i) > 0.0)) fail(inertia.at(static_cast<size_t>(i)).path(), "must be positive");
  }
  sc.hand_chart = parse_chart(root.at("hand").at("chart"));
  sc.system.hand = sc.hand_chart.build();
  if (const auto f = root.find("friction")) sc.system.friction = parse_friction(*f, sc.system.spin_rule);
  sc.system.gravity = root.vector_or("gravity", sc.system.gravity);

  parse_initial(root.at("initial_state"), sc);
  sc.control = root.has("control") ? parse_control(root.at("control"), base_dir) : ControlProgram{};
  if (const auto s = root.find("simulation")) parse_simulation(*s, sc);

  if (const auto v = root.find("validate")) {
    ValidateSpec vs;
    vs.oracle = v->at("oracle").string();
    static const std::array<const char*, 5> known{"turntable_orbit", "turntable_drift", "energy", "spin",
                                                  "consistency"};
    if (std::find(known.begin(), known.end(), vs.oracle) == known.end()) {
      fail(v->at("oracle").path(), "unknown oracle '" + vs.oracle + "'");
    }
    if ((vs.oracle == "turntable_orbit" || vs.oracle == "turntable_drift") && !sc.turntable) {
      fail(v->at("oracle").path(), "turntable oracles need initial_state.turntable");
    }
    vs.tolerance = v->positive_or("tolerance", default_oracle_tolerance(vs.oracle));
    sc.validate = vs;
  }
  if (const auto p = root.find("plan")) sc.plan = parse_plan(*p, sc);
  if (const auto s = root.find("stabilize")) sc.stabilize = parse_stabilize(*s, sc);

  if (sc.task == "validate" && !sc.validate) fail("scenario.validate", "missing required field");
  if (sc.task == "plan" && !sc.plan) fail("scenario.plan", "missing required field");
  if (sc.task == "stabilize" && !sc.stabilize) fail("scenario.stabilize", "missing required field");
  if ((sc.task == "simulate" || sc.task == "validate") && !root.has("simulation")) {
    fail("scenario.simulation", "missing required field");
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError(file.string() + ": cannot open scenario");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(file.string() + ": not valid JSON: " + e.what());
  }
  return parse_scenario(doc, file.parent_path());
}

}  // namespace rolling

#endif  // ROLLING_SCENARIO_HPP_
