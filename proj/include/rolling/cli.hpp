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


// Scenario-driven command-line frontend.
//
//   rolling simulate|validate|plan|stabilize --scenario FILE [--out DIR]
//           [--tol REL] [--seed N]
//
// Exit codes: 0 success, 1 input error, 2 constraint halt, 3 infeasible plan.

#ifndef ROLLING_CLI_HPP_
#define ROLLING_CLI_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rolling/control.hpp"
#include "rolling/oracles.hpp"
#include "rolling/planner.hpp"
#include "rolling/scenario.hpp"

namespace rolling::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kInputError = 1, kConstraintHalt = 2, kInfeasiblePlan = 3 };

struct Options {
  std::string command;
  std::filesystem::path scenario;
  std::filesystem::path out_dir = "rolling_out";
  std::optional<double> tol;
  std::uint64_t seed = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Run {
 public:
  Run(const Options& opt, std::ostream& out) : opt_(opt), out_(out), t0_(Clock::now()) {}

  void write_csv_file(const std::string& name, const Trajectory& tr) {
    std::ofstream f(opt_.out_dir / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (opt_.out_dir / name).string());
    write_csv(f, tr);
    outputs_.push_back(name);
  }
  void write_json_file(const std::string& name, const json& j) {
    std::ofstream f(opt_.out_dir / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (opt_.out_dir / name).string());
    f << j.dump(2) << "\n";
    outputs_.push_back(name);
  }
  void time(const std::string& what, double s) { timings_[what] = s; }
  void halt(const Trajectory& tr, const std::string& which) {
    if (!tr.halted()) return;
    halts_.push_back({{"trajectory", which},
                      {"cause", to_string(tr.halt)},
                      {"time", tr.halt_time},
                      {"message", tr.halt_message}});
  }
  json& summary() { return summary_; }

  void finish(const Scenario& sc, int code) {
    timings_["total_seconds"] = seconds_since(t0_);
    json m;
    m["tool"] = "rolling";
    m["version"] = kVersion;
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["command"] = opt_.command;
    m["scenario_path"] = opt_.scenario.string();
    m["scenario"] = sc.source;
    m["options"] = {{"out", opt_.out_dir.string()},
                    {"tol", opt_.tol ? json(*opt_.tol) : json()},
                    {"seed", opt_.seed}};
    m["timings"] = timings_;
    m["halt"] = halts_.empty() ? json() : halts_.front();
    m["halts"] = halts_;
    m["summary"] = summary_;
    m["exit_code"] = code;
    outputs_.push_back("manifest.json");
    m["outputs"] = outputs_;
    std::ofstream f(opt_.out_dir / "manifest.json", std::ios::binary);
    if (!f) throw InputError("cannot write manifest.json");
    f << m.dump(2) << "\n";
  }

  const Options& options() const { return opt_; }
  std::ostream& out() { return out_; }

 private:
  const Options& opt_;
  std::ostream& out_;
  Clock::time_point t0_;
  json timings_ = json::object();
  json halts_ = json::array();
  json summary_ = json::object();
  std::vector<std::string> outputs_;
};

inline Trajectory timed_simulate(Run& run, const std::string& label, const RollingSystem& sys,
                                 const RollingState& s0, const ControlLaw& law, double t_f,
                                 const SimulationOptions& opt) {
  const auto t0 = Clock::now();
  Trajectory tr = simulate(sys, s0, law, t_f, opt);
  run.time(label + "_seconds", seconds_since(t0));
  return tr;
}

// Maximum rolling consistency residual and |omega_z| along a trajectory.
struct ResidualScan {
  double consistency = 0.0;
  double spin = 0.0;
};

inline ResidualScan scan_residuals(const RollingSystem& sys, const Trajectory& tr) {
  ResidualScan r;
  const ContactPair pair = sys.pair();
  for (const TrajectorySample& s : tr.samples) {
    const RollingState rs = RollingState::from_vector(s.state);
    const OmegaRecovery rec = recover_omega(contact_geometry(pair, rs.q), rs.qdot);
    r.consistency = std::max(r.consistency, rec.residual);
    r.spin = std::max(r.spin, std::abs(rec.omega(2)));
  }
  return r;
}

inline json vec_json(const VecX& v) { return to_std(v); }

inline json orbit_report(const Scenario& sc, const Trajectory& tr) {
  const TurntableSpec& tt = *sc.turntable;
  const RollingSystem& sys = sc.system;
  const StateVector s0 = tr.samples.front().state;
  const Vec3 c0 = contact_point_space(sys, s0);
  const Vec3 v0(tt.ball_velocity(0), tt.ball_velocity(1), 0.0);
  const TurntableOrbit o = horizontal_orbit(sys.object, tt.radius, tt.omega_plate, c0, v0);
  std::vector<Vec2> pts;
  double divergence = 0.0;
  for (const TrajectorySample& s : tr.samples) {
    const Vec3 c = contact_point_space(sys, s.state);
    pts.push_back(c.head<2>());
    divergence = std::max(divergence, std::abs((c - o.center).head<2>().norm() - o.radius));
  }
  const CircleFit fit = fit_circle(pts);
  // Period from a least-squares slope of the unwrapped polar angle.
  std::vector<double> ang;
  double prev = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - fit.center;
    double a = std::atan2(d(1), d(0));
    if (i > 0) a += 2.0 * std::numbers::pi * std::round((prev - a) / (2.0 * std::numbers::pi));
    ang.push_back(a);
    prev = a;
  }
  double st = 0, sa = 0, stt = 0, sta = 0;
  const double n = static_cast<double>(ang.size());
  for (size_t i = 0; i < ang.size(); ++i) {
    const double t = tr.samples[i].t;
    st += t;
    sa += ang[i];
    stt += t * t;
    sta += t * ang[i];
  }
  const double slope = (n * sta - st * sa) / (n * stt - st * st);
  const double period = 2.0 * std::numbers::pi / std::abs(slope);
  const double period_ref = 2.0 * std::numbers::pi / std::abs(o.omega_c);
  json j;
  j["analytic"] = {{"center", vec_json(o.center.head<2>())}, {"radius", o.radius}, {"period", period_ref}};
  j["fit"] = {{"center", vec_json(fit.center)}, {"radius", fit.radius}, {"rms", fit.rms}, {"period", period}};
  j["center_error"] = (fit.center - o.center.head<2>()).norm();
  j["radius_error"] = std::abs(fit.radius - o.radius);
  j["period_relative_error"] = std::abs(period / period_ref - 1.0);
  j["radius_divergence"] = divergence;
  j["radius_divergence_percent"] = 100.0 * divergence / o.radius;
  j["metric"] = j["radius_divergence_percent"];
  return j;
}

inline json drift_report(const Scenario& sc, const Trajectory& tr) {
  const TurntableSpec& tt = *sc.turntable;
  std::vector<double> t, x;
  for (const TrajectorySample& s : tr.samples) {
    t.push_back(s.t);
    x.push_back(contact_point_space(sc.system, s.state)(0));
  }
  const DriftFit fit = fit_drift(t, x, 2.0 / 7.0 * tt.omega_plate);
  const double ref = tilted_drift(tt.omega_plate, tt.tilt, sc.system.gravity.norm());
  json j;
  j["analytic_drift"] = ref;
  j["fit_drift"] = fit.velocity;
  j["relative_error"] = std::abs(fit.velocity / ref - 1.0);
  j["metric"] = j["relative_error"];
  return j;
}

inline json energy_report(const Scenario& sc, const Trajectory& tr) {
  const double e0 = mechanical_energy(sc.system, RollingState::from_vector(tr.samples.front().state));
  double worst = 0.0;
  for (const TrajectorySample& s : tr.samples) {
    const double e = mechanical_energy(sc.system, RollingState::from_vector(s.state));
    worst = std::max(worst, std::abs(e - e0));
  }
  const double scale = std::max(std::abs(e0), 1e-300);
  json j;
  j["initial_energy"] = e0;
  j["max_abs_drift"] = worst;
  j["relative_drift"] = worst / scale;
  j["metric"] = j["relative_drift"];
  return j;
}

inline int cmd_simulate(Run& run, const Scenario& sc) {
  const Trajectory tr =
      timed_simulate(run, "simulate", sc.system, sc.initial, sc.control.law(), sc.t_f, sc.simulation);
  run.write_csv_file("trajectory.csv", tr);
  run.halt(tr, "trajectory");
  run.summary() = {{"samples", tr.samples.size()},
                   {"accepted_steps", tr.stats.accepted},
                   {"rejected_steps", tr.stats.rejected},
                   {"max_projection", tr.max_projection}};
  run.out() << "simulate: " << tr.samples.size() << " samples, halt " << to_string(tr.halt) << "\n";
  return tr.halted() ? kConstraintHalt : kOk;
}

inline int cmd_validate(Run& run, const Scenario& sc) {
  const ValidateSpec& v = *sc.validate;
  const Trajectory tr =
      timed_simulate(run, "simulate", sc.system, sc.initial, sc.control.law(), sc.t_f, sc.simulation);
  run.write_csv_file("trajectory.csv", tr);
  run.halt(tr, "trajectory");
  json rep;
  rep["scenario"] = sc.name;
  rep["oracle"] = v.oracle;
  rep["t_f"] = sc.t_f;
  rep["halt"] = to_string(tr.halt);
  const ResidualScan res = scan_residuals(sc.system, tr);
  rep["max_consistency_residual"] = res.consistency;
  rep["max_spin_rate"] = res.spin;
  rep["max_projection"] = tr.max_projection;
  if (v.oracle == "turntable_orbit") {
    rep["result"] = orbit_report(sc, tr);
  } else if (v.oracle == "turntable_drift") {
    rep["result"] = drift_report(sc, tr);
  } else if (v.oracle == "energy") {
    rep["result"] = energy_report(sc, tr);
  } else if (v.oracle == "spin") {
    rep["result"] = {{"metric", res.spin}};
  } else {
    rep["result"] = {{"metric", res.consistency}};
  }
  const double metric = rep["result"]["metric"].get<double>();
  rep["tolerance"] = v.tolerance;
  rep["pass"] = !tr.halted() && metric < v.tolerance;
  run.write_json_file("report.json", rep);
  run.summary() = rep;
  run.out() << rep.dump(2) << "\n";
  return tr.halted() ? kConstraintHalt : kOk;
}

inline PlanResult timed_plan(Run& run, const PlanSpec& p) {
  const auto t0 = Clock::now();
  IdcOptions idc = p.idc;
  idc.nlp.throw_on_failure = false;
  PlanResult r = plan_idc(p.problem, p.weights, idc);
  run.time("plan_seconds", seconds_since(t0));
  return r;
}

inline int cmd_plan(Run& run, const Scenario& sc) {
  const PlanSpec& p = *sc.plan;
  const PlanResult r = timed_plan(run, p);
  run.write_json_file("plan.json", plan_to_json(p.problem, p.idc, r));
  if (!r.fine.samples.empty()) run.write_csv_file("trajectory.csv", r.fine);
  run.halt(r.fine, "fine_rollout");
  run.summary() = {{"status", to_string(r.status)},
                   {"final_error", std::isfinite(r.final_error) ? json(r.final_error) : json()},
                   {"iterations", r.iterations},
                   {"segments", r.coarse.size() - 1}};
  run.out() << "plan: " << to_string(r.status) << ", final error " << r.final_error << " after " << r.iterations
            << " iteration(s)\n";
  return r.status == PlanStatus::kValid ? kOk : kInfeasiblePlan;
}

inline int cmd_stabilize(Run& run, const Scenario& sc) {
  const StabilizeSpec& st = *sc.stabilize;
  const RollingSystem& sys = sc.system;
  KnotTrajectory knots;
  std::optional<Trajectory> fine;
  if (st.source == "plan") {
    const PlanResult r = timed_plan(run, *sc.plan);
    run.write_json_file("plan.json", plan_to_json(sc.plan->problem, sc.plan->idc, r));
    run.summary()["plan_status"] = to_string(r.status);
    run.summary()["plan_final_error"] = std::isfinite(r.final_error) ? json(r.final_error) : json();
    if (r.status == PlanStatus::kInfeasible || r.coarse.size() < 2) {
      run.out() << "stabilize: nominal plan infeasible\n";
      return kInfeasiblePlan;
    }
    knots = r.coarse;
    if (st.use == "fine") fine = r.fine;
  } else {
    knots = scenario_detail::read_plan_file(sc.base_dir / st.plan_file, "coarse", "scenario.stabilize.nominal.file");
  }
  const NominalTrajectory nom =
      fine ? NominalTrajectory::from_trajectory(sys, *fine) : NominalTrajectory::from_knots(sys, knots);

  const auto t0 = Clock::now();
  const GainSchedule g = riccati_backward(sys, nom, st.weights, st.active, st.riccati);
  run.time("riccati_seconds", seconds_since(t0));
  run.write_json_file("gains.json", gains_to_json(g));

  RollingState s0 = RollingState::from_vector(nom.state(nom.t0()));
  if (st.perturbation > 0.0) {
    std::mt19937_64 rng(run.options().seed);
    std::normal_distribution<double> n(0.0, st.perturbation);
    const double dx = n(rng), dy = n(rng);
    s0.q = roll_to_hand_point(sys.pair(), s0.q, Vec2(dx, dy));
  }
  const auto t1 = Clock::now();
  const ClosedLoopResult cl = closed_loop_simulate(sys, s0, nom, g, sc.simulation);
  const ClosedLoopResult ol = open_loop_simulate(sys, s0, nom, sc.simulation);
  run.time("rollout_seconds", seconds_since(t1));
  run.write_csv_file("closed_loop.csv", cl.trajectory);
  run.write_csv_file("open_loop.csv", ol.trajectory);
  run.halt(cl.trajectory, "closed_loop");
  run.summary()["open_loop_final_deviation"] = ol.final_deviation();
  run.summary()["closed_loop_final_deviation"] = cl.final_deviation();
  run.summary()["open_loop_halt"] = to_string(ol.trajectory.halt);
  run.summary()["closed_loop_halt"] = to_string(cl.trajectory.halt);
  run.summary()["gain_norm_t0"] = g.K.front().norm();
  run.out() << "stabilize: final deviation open " << ol.final_deviation() << ", closed " << cl.final_deviation()
            << "\n";
  return cl.trajectory.halted() ? kConstraintHalt : kOk;
}

}  // namespace detail

// Runs one command; diagnostics go to `err`.
inline int run(const Options& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::optional<Scenario> sc;
  try {
    sc = load_scenario(opt.scenario);
    if (opt.tol) {
      if (!(*opt.tol > 0.0)) throw InputError("--tol: must be positive");
      sc->simulation.integrator.rel_tol = *opt.tol;
      sc->simulation.integrator.abs_tol = *opt.tol * 1e-2;
      if (sc->plan) sc->plan->idc.fine = sc->simulation;
    }
    if (opt.command == "validate" && !sc->validate) throw InputError("scenario.validate: missing required field");
    if (opt.command == "plan" && !sc->plan) throw InputError("scenario.plan: missing required field");
    if (opt.command == "stabilize" && !sc->stabilize) {
      throw InputError("scenario.stabilize: missing required field");
    }
    if ((opt.command == "simulate" || opt.command == "validate") && !sc->source.contains("simulation")) {
      throw InputError("scenario.simulation: missing required field");
    }
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) throw InputError("--out: cannot create '" + opt.out_dir.string() + "': " + ec.message());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  detail::Run r(opt, out);
  int code = kInputError;
  try {
    if (opt.command == "simulate") {
      code = detail::cmd_simulate(r, *sc);
    } else if (opt.command == "validate") {
      code = detail::cmd_validate(r, *sc);
    } else if (opt.command == "plan") {
      code = detail::cmd_plan(r, *sc);
    } else if (opt.command == "stabilize") {
      code = detail::cmd_stabilize(r, *sc);
    } else {
      err << "error: unknown command '" << opt.command << "'\n";
      return kInputError;
    }
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    code = kInfeasiblePlan;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = kInputError;
  }
  try {
    r.finish(*sc, code);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return code;
}

// Parses argv and dispatches to run().
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Simulate, validate, plan and stabilize a rigid object rolling on a moving hand."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options opt;
  double tol = 0.0;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "Integrate the scenario's control program and write trajectory.csv"},
      {"validate", "Compare a simulation against its analytical oracle and write report.json"},
      {"plan", "Run iterative direct collocation and write plan.json and the fine rollout"},
      {"stabilize", "Compute a time-varying LQR schedule and roll out open and closed loop"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    s->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    s->add_option("--tol", tol, "Relative integrator tolerance (absolute is 1e-2 of it)");
    s->add_option("--seed", opt.seed, "Seed for randomized perturbations")->capture_default_str();
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  for (CLI::App* s : subs) {
    if (s->parsed()) {
      opt.command = s->get_name();
      if (s->count("--tol") > 0) opt.tol = tol;
    }
  }
  return run(opt, out, err);
}

}  // namespace rolling::cli

#endif  // ROLLING_CLI_HPP_
