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

#ifndef VSASRL_REACTION_HPP
#define VSASRL_REACTION_HPP

#include <optional>
#include <string>

#include "vsasrl/arm.hpp"

namespace vsasrl {

enum class ReactionStrategy {
  ZeroTorque,            // tau_m = 0, stiffness held
  ZeroTorquePlusSoften,  // tau_m = 0, k_target = k_min
};

std::string to_string(ReactionStrategy s);
/// Accepts "zero_torque" and "zero_torque_soften". Throws InvalidArgument.
ReactionStrategy reaction_from_string(const std::string& s);

/// Control override in force after a detection.
struct ReactionOverride {
  Vec2 tau_m = Vec2::Zero();
  std::optional<Vec2> k_target;
};

ReactionOverride apply_reaction(ReactionStrategy strategy, const ArmParams& p, const ArmState& s);

}  // namespace vsasrl

#endif  // VSASRL_REACTION_HPP
