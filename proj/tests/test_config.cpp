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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "vsasrl/config.hpp"

namespace vsasrl {
namespace {

using nlohmann::json;

std::vector<std::string> errors_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& path) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(path, 0) == 0; });
}

TEST(Config, MinimalDocumentGivesDefaults) {
  const SimConfig c = parse_config(json{{"schema_version", 1}});
  const SimConfig d;
  EXPECT_EQ(c.arm.length, d.arm.length);
  EXPECT_EQ(c.r_hat_max, d.r_hat_max);
  EXPECT_EQ(c.medium.F_y, d.medium.F_y);
  EXPECT_EQ(c.track_target, d.track_target);
  EXPECT_EQ(c.workspace.cooperative_region.x_max, d.workspace.cooperative_region.x_max);
}

TEST(Config, DefaultsAreValid) { EXPECT_TRUE(violations(SimConfig{}).empty()); }

TEST(Config, RoundTripIsExact) {
  SimConfig c;
  c.arm.alpha = deg2rad(30.0);
  c.medium.F_y = 26.0;
  c.stab_cases = {2};
  c.session.script = json::array({{{"t", 1.0}, {"button", 1}, {"value", 1}}});
  const json j = to_json(c);
  const SimConfig back = parse_config(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_NEAR(back.arm.alpha, c.arm.alpha, 1e-15);
  EXPECT_EQ(back.stab_cases, c.stab_cases);
  EXPECT_EQ(back.session.script, c.session.script);
}

TEST(Config, AnglesAreDegreesInFile) {
  const json j = to_json(SimConfig{});
  EXPECT_DOUBLE_EQ(j["arm"]["theta_max_deg"][1].get<double>(), 125.0);
  EXPECT_DOUBLE_EQ(j["arm"]["omega_max_dps"].get<double>(), 120.0);
  const SimConfig c = parse_config(json{{"schema_version", 1}, {"arm", {{"alpha_deg", 90.0}}}});
  EXPECT_DOUBLE_EQ(c.arm.alpha, kPi / 2);
}

TEST(Config, SchemaVersionRequiredAndChecked) {
  EXPECT_TRUE(mentions(errors_of(json::object()), "schema_version"));
  EXPECT_TRUE(mentions(errors_of(json{{"schema_version", 2}}), "schema_version"));
}

TEST(Config, UnknownKeysReportedWithPath) {
  const auto e = errors_of(json{{"schema_version", 1}, {"arm", {{"lenght", {1, 1}}}}, {"extra", 0}});
  EXPECT_TRUE(mentions(e, "arm.lenght: unknown"));
  EXPECT_TRUE(mentions(e, "extra: unknown"));
}

TEST(Config, TypeErrorsReportedWithPath) {
  const auto e = errors_of(json{{"schema_version", 1},
                                {"arm", {{"tau_max", "big"}, {"mass", {1.0}}}},
                                {"tracking", {{"elbow", "sideways"}, {"stiffness_schedule", 1}}},
                                {"workspace", {{"grid", {{"l1", {1, 2}}}}}}});
  EXPECT_TRUE(mentions(e, "arm.tau_max"));
  EXPECT_TRUE(mentions(e, "arm.mass"));
  EXPECT_TRUE(mentions(e, "tracking.elbow"));
  EXPECT_TRUE(mentions(e, "tracking.stiffness_schedule"));
  EXPECT_TRUE(mentions(e, "workspace.grid.l1"));
}

TEST(Config, InvariantViolationsListEveryField) {
  const auto e = errors_of(json{{"schema_version", 1},
                                {"arm", {{"tau_max", -1.0}}},
                                {"observer", {{"epsilon_c", -1.0}}},
                                {"stab", {{"cases", {4}}}},
                                {"session", {{"log_every", 0}}}});
  EXPECT_TRUE(mentions(e, "arm.tau_max"));
  EXPECT_TRUE(mentions(e, "observer.epsilon_c"));
  EXPECT_TRUE(mentions(e, "stab.cases"));
  EXPECT_TRUE(mentions(e, "session.log_every"));
}

TEST(Config, DishOutsideCooperativeRegionRejected) {
  const auto e = errors_of(json{{"schema_version", 1}, {"task", {{"dish_center_mm", {400.0, 650.0}}}}});
  EXPECT_TRUE(mentions(e, "task.dish_center"));
}

TEST(Config, LayoutFollowsOffsets) {
  const SimConfig c = parse_config(json{{"schema_version", 1}, {"workspace", {{"midline_gap", 100.0}}}});
  EXPECT_DOUBLE_EQ(c.workspace.cooperative_region.x_max, -100.0);
}

TEST(Config, LoadReportsFileProblems) {
  EXPECT_THROW(load_config("/nonexistent/vsasrl.json"), ValidationError);
  const std::string path = testing::TempDir() + "vsasrl_bad.json";
  std::ofstream(path) << "{\"schema_version\": 1,";
  EXPECT_THROW(load_config(path), ValidationError);
  std::ofstream(path) << to_json(SimConfig{}).dump(2);
  EXPECT_NO_THROW(load_config(path));
  std::remove(path.c_str());
}

TEST(Config, ShippedPresetsLoad) {
  for (const char* name : {"default.json", "tilted.json", "link_side.json"})
    EXPECT_NO_THROW(load_config(std::string(VSASRL_CONFIG_DIR) + "/" + name)) << name;
}

}  // namespace
}  // namespace vsasrl
