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

#include "vsasrl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace vsasrl {

using nlohmann::json;

std::filesystem::path log_directory(const std::filesystem::path& fallback) {
  const char* env = std::getenv(kLogDirEnv);
  return env && *env ? std::filesystem::path(env) : fallback;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("csv: missing header");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma)
        throw InvalidArgument("csv line " + std::to_string(n) + ": not a number");
      row.push_back(v);
      p = comma + 1;
    }
    if (row.size() != t.header.size())
      throw InvalidArgument("csv line " + std::to_string(n) + ": expected " +
                            std::to_string(t.header.size()) + " cells");
    t.rows.push_back(std::move(row));
  }
  return t;
}

const std::vector<std::string> kTrackColumns{"t",    "q1_d", "q2_d", "q1",     "q2",     "phi1",
                                             "phi2", "k1",   "k2",   "tau1",   "tau2",   "r1",
                                             "r2",   "eps_r1", "eps_r2", "x", "y"};

CsvTable track_table(const TrajectoryLog& log) {
  CsvTable t{kTrackColumns, {}};
  t.rows.reserve(log.rows.size());
  for (const TrackRow& r : log.rows)
    t.rows.push_back({r.t, r.q_d(0), r.q_d(1), r.q(0), r.q(1), r.phi(0), r.phi(1), r.k(0), r.k(1),
                      r.tau(0), r.tau(1), r.r(0), r.r(1), r.eps_r(0), r.eps_r(1), r.x_mm, r.y_mm});
  return t;
}

json track_summary(const TrajectoryLog& log) {
  json detections = json::array();
  for (const auto& d : log.detections)
    detections.push_back({{"t", d.time}, {"joint", d.joint + 1}, {"r", d.residual_value}});
  return {{"target_mm", {log.target.x, log.target.y}},
          {"theta_target_deg", {rad2deg(log.theta_target(0)), rad2deg(log.theta_target(1))}},
          {"plan_duration_s", log.plan_duration},
          {"time_scale", log.time_scale},
          {"peak_ee_speed_mps", log.peak_ee_speed},
          {"rms_error_deg", {log.rms_error_deg(0), log.rms_error_deg(1)}},
          {"max_abs_error_deg", {log.max_abs_error_deg(0), log.max_abs_error_deg(1)}},
          {"final_error_mm", log.final_cartesian_error_mm},
          {"detections", detections},
          {"saturated", log.saturated},
          {"limit_hit", log.limit_hit},
          {"samples", log.rows.size()}};
}

const std::vector<std::string> kStabColumns{"case", "velocity_mps", "F_p_N", "d_p_mm", "detected_at_s"};

CsvTable stab_table(const std::vector<StabResult>& results) {
  CsvTable t{kStabColumns, {}};
  for (const auto& r : results)
    t.rows.push_back({static_cast<double>(r.case_id), r.velocity, r.F_p, r.d_p, r.detected_at});
  return t;
}

void write_occupancy_csv(std::ostream& out, const std::vector<OccupancyRow>& rows) {
  out << "x_mm,y_mm,label\n";
  for (const auto& r : rows) out << format_number(r.x_mm) << ',' << format_number(r.y_mm) << ',' << r.label << '\n';
}

json workspace_summary(const WorkspaceResult& r) {
  return {{"l1_mm", r.l1},
          {"l2_mm", r.l2},
          {"theta1_max_deg", r.theta1_max_deg},
          {"theta2_max_deg", r.theta2_max_deg},
          {"area_mm2", r.area_mm2},
          {"constraints",
           {{"link1_clear", r.feasible.link1_clear},
            {"coverage", r.feasible.coverage},
            {"human_clear", r.feasible.human_clear}}},
          {"candidates_evaluated", r.candidates_evaluated}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace vsasrl
