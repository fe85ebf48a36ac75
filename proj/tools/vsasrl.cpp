// Copyright 2026 The vsasrl Authors
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

// Command-line front end. Outputs go to --log-dir, else $VSASRL_LOG_DIR,
// else ./vsasrl_logs. Exit codes: 0 success, 1 configuration or input error,
// 2 runtime error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "vsasrl/config.hpp"
#include "vsasrl/io.hpp"
#include "vsasrl/server.hpp"
#include "vsasrl/session.hpp"

namespace {

using namespace vsasrl;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

/// Input problems (bad config, bad events file) map to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::string log_dir;
  std::string events;
  double x = 0.0, y = 0.0;
  std::optional<double> duration;
  double tail = 10.0;
  int port = 8765;
  std::string address = "127.0.0.1";
  bool verbose = false;
  std::string write;
};

std::filesystem::path out_dir(const Options& o) {
  return o.log_dir.empty() ? log_directory() : std::filesystem::path(o.log_dir);
}

void setup_logging(const Options& o) {
  std::vector<spdlog::sink_ptr> sinks{std::make_shared<spdlog::sinks::stderr_color_sink_mt>()};
  const auto dir = out_dir(o);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!ec) sinks.push_back(std::make_shared<spdlog::sinks::basic_file_sink_mt>((dir / "vsasrl.log").string()));
  auto logger = std::make_shared<spdlog::logger>("vsasrl", sinks.begin(), sinks.end());
  logger->set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
  logger->flush_on(spdlog::level::info);
  spdlog::set_default_logger(logger);
}

SimConfig load(const Options& o) {
  SimConfig c = load_config(o.config);
  spdlog::info("config {} (schema {})", o.config, c.schema_version);
  return c;
}

std::string csv_text(const CsvTable& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

void emit(const std::filesystem::path& path, const std::string& text) {
  write_file(path, text);
  spdlog::info("wrote {}", path.string());
}

std::vector<ScriptedCommand> read_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  try {
    return read_event_lines(in);
  } catch (const InvalidArgument& e) {
    throw InputError(path + ": " + e.what());
  }
}

double script_end(const std::vector<ScriptedCommand>& s) {
  double end = 0.0;
  for (const auto& c : s) end = std::max(end, c.t);
  return end;
}

int cmd_track(const Options& o) {
  const SimConfig c = load(o);
  const PlanarPose target{o.x, o.y};
  const auto log = track(c.arm, c.arm, target, c.tracking, c.observer, c.threshold());
  const auto dir = out_dir(o);
  emit(dir / "track.csv", csv_text(track_table(log)));
  const json summary = track_summary(log);
  emit(dir / "track_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_optimize(const Options& o) {
  const SimConfig c = load(o);
  const auto t0 = std::chrono::steady_clock::now();
  const WorkspaceResult r = optimize_workspace(c.workspace, c.grid, c.area_step_deg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json summary = workspace_summary(r);
  summary["runtime_s"] = wall;
  const auto dir = out_dir(o);
  const auto region = reachable_workspace(r.l1, r.l2, LimitBox{r.theta1_max_deg, r.theta2_max_deg},
                                          c.area_step_deg, c.workspace.cell_mm);
  std::ostringstream occ;
  write_occupancy_csv(occ, occupancy_rows(region, c.workspace));
  emit(dir / "occupancy.csv", occ.str());
  emit(dir / "workspace.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_stab(const Options& o) {
  const SimConfig c = load(o);
  const auto results = sweep(c.stab_velocities, c.stab_cases, c.arm, c.observer, c.threshold(), c.medium, c.stab,
                             c.tracking.gains);
  const auto dir = out_dir(o);
  const std::string text = csv_text(stab_table(results));
  emit(dir / "stab.csv", text);
  std::cout << text;
  return kOk;
}

int run_session_batch(const Options& o, const SimConfig& c, const std::vector<ScriptedCommand>& script,
                      double duration, const std::string& stem) {
  const auto t0 = std::chrono::steady_clock::now();
  BatchResult r = run_batch(c, script, duration);
  r.summary["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto dir = out_dir(o);
  std::ostringstream trace;
  write_session_csv(trace, r.trace);
  emit(dir / (stem + ".csv"), trace.str());
  emit(dir / (stem + "_summary.json"), r.summary.dump(2) + "\n");
  for (const SessionRow& row : r.trace) {
    if (row.event.empty()) continue;
    std::string state = to_string(row.task.mode);
    if (row.task.faulted) state += " fault";
    else if (row.task.in_transit) state += " transit";
    else if (row.task.knife) state += " knife";
    std::printf("%9.3f  %-16s %-9s %s\n", row.t, row.event.c_str(), row.accepted ? "accepted" : "ignored",
                state.c_str());
  }
  std::cout << "final state " << r.summary["final_state"]["fsm_state"].get<std::string>() << " at t = "
            << r.summary["sim_time_s"].get<double>() << " s; " << r.summary["events_accepted"] << " events, "
            << r.summary["detections"].size() << " detections, " << r.summary["contract_violations"]
            << " contract violations\n";
  return r.summary["contract_violations"].get<std::size_t>() == 0 ? kOk : kRuntimeError;
}

int cmd_simulate(const Options& o) {
  const SimConfig c = load(o);
  std::vector<ScriptedCommand> script;
  try {
    script = o.events.empty() ? parse_script(c.session.script) : read_events(o.events);
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("session.script: ") + e.what());
  }
  return run_session_batch(o, c, script, o.duration.value_or(c.session.duration), "session");
}

int cmd_fsm_demo(const Options& o) {
  const SimConfig c = load(o);
  const auto script = read_events(o.events);
  return run_session_batch(o, c, script, o.duration.value_or(script_end(script) + o.tail), "fsm_trace");
}

int cmd_serve(const Options& o) {
  const SimConfig c = load(o);
  if (o.port < 0 || o.port > 65535) throw InputError("--port must lie in [0, 65535]");
  ServerOptions so;
  so.address = o.address;
  so.port = static_cast<unsigned short>(o.port);
  so.handle_signals = true;
  SessionServer server(c, so);
  server.start();
  std::cout << "ws://" << o.address << ":" << server.port() << std::endl;
  if (o.duration) {
    server.wait_for(*o.duration);
    server.stop();
  } else {
    server.wait();
  }
  spdlog::info("stopped after {} ticks", server.ticks());
  return kOk;
}

int cmd_calibrate(const Options& o) {
  SimConfig c = load(o);
  const CalibrationReport rep =
      calibrate_with_mismatch(c.arm, c.observer, c.tracking, c.track_target, c.stab, c.calibration);
  const MediumCalibration med = calibrate_medium(c.medium, c.arm, c.observer, rep.threshold, c.stab,
                                                 c.tracking.gains, c.medium_v_intact, c.medium_v_cut);
  c.r_hat_max = rep.threshold.r_hat_max;
  c.medium.F_y = med.medium.F_y;
  const nlohmann::json report = {{"runs", rep.runs},
                                 {"worst_tracking_residual", {rep.worst_tracking(0), rep.worst_tracking(1)}},
                                 {"worst_approach_residual", {rep.worst_approach(0), rep.worst_approach(1)}},
                                 {"r_hat_max", {rep.threshold.r_hat_max(0), rep.threshold.r_hat_max(1)}},
                                 {"epsilon_r", {rep.threshold.epsilon_r(0), rep.threshold.epsilon_r(1)}},
                                 {"F_y_bracket", {med.F_y_low, med.F_y_high}},
                                 {"F_y", med.medium.F_y}};
  emit(out_dir(o) / "calibration.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  if (!o.write.empty()) {
    emit(o.write, to_json(c).dump(2) + "\n");
    spdlog::info("calibrated config written to {}", o.write);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-stiffness supernumerary limb simulator"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--log-dir", o.log_dir, std::string("Output directory (default: $") + kLogDirEnv + " or ./vsasrl_logs)");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  auto config_arg = [&](CLI::App* sub) { sub->add_option("config", o.config, "Config JSON")->required(); };

  auto* simulate = app.add_subcommand("simulate", "Batch session driven by the config's script (or --events)");
  config_arg(simulate);
  simulate->add_option("--events", o.events, "JSON-lines command script");
  simulate->add_option("--duration", o.duration, "Loop seconds (default: session.duration)");

  auto* optimize = app.add_subcommand("optimize-workspace", "Link-length / joint-limit sweep");
  config_arg(optimize);

  auto* stab = app.add_subcommand("stab-sweep", "Stabbing scenario over the configured cases and velocities");
  config_arg(stab);

  auto* trk = app.add_subcommand("track", "Timed move from home to a Cartesian target");
  config_arg(trk);
  trk->add_option("--x", o.x, "Target x, mm")->required();
  trk->add_option("--y", o.y, "Target y, mm")->required();

  auto* fsm = app.add_subcommand("fsm-demo", "Replay a button-event file and write the state/command trace");
  config_arg(fsm);
  fsm->add_option("--events", o.events, "JSON-lines events {t, button, value}")->required();
  fsm->add_option("--tail", o.tail, "Seconds simulated after the last event")->check(CLI::NonNegativeNumber);
  fsm->add_option("--duration", o.duration, "Loop seconds (overrides --tail)");

  auto* serve = app.add_subcommand("serve", "Real-time session over WebSocket");
  config_arg(serve);
  serve->add_option("--port", o.port, "TCP port (0 picks one)");
  serve->add_option("--address", o.address, "Bind address");
  serve->add_option("--duration", o.duration, "Stop after this many wall seconds");

  auto* cal = app.add_subcommand("calibrate", "Collision threshold and medium yield force from the config's runs");
  config_arg(cal);
  cal->add_option("--write", o.write, "Write the config with calibrated values here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (o.duration && !(*o.duration > 0.0)) {
    std::cerr << "--duration must be > 0\n";
    return kConfigError;
  }

  setup_logging(o);
  try {
    if (*simulate) return cmd_simulate(o);
    if (*optimize) return cmd_optimize(o);
    if (*stab) return cmd_stab(o);
    if (*trk) return cmd_track(o);
    if (*fsm) return cmd_fsm_demo(o);
    if (*serve) return cmd_serve(o);
    if (*cal) return cmd_calibrate(o);
  } catch (const ValidationError& e) {
    spdlog::error("invalid configuration:");
    for (const auto& v : e.violations()) spdlog::error("  {}", v);
    return kConfigError;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
  return kRuntimeError;
}
