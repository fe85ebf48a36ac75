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

#include "vsasrl/reaction.hpp"

namespace vsasrl {

std::string to_string(ReactionStrategy s) {
  return s == ReactionStrategy::ZeroTorque ? "zero_torque" : "zero_torque_soften";
}

ReactionStrategy reaction_from_string(const std::string& s) {
  if (s == "zero_torque") return ReactionStrategy::ZeroTorque;
  if (s == "zero_torque_soften") return ReactionStrategy::ZeroTorquePlusSoften;
  throw InvalidArgument("unknown reaction strategy '" + s + "'");
}

ReactionOverride apply_reaction(ReactionStrategy strategy, const ArmParams& p, const ArmState& s) {
  ReactionOverride o;
  if (strategy == ReactionStrategy::ZeroTorquePlusSoften)
    o.k_target = Vec2::Constant(p.k_min);
  else
    o.k_target = s.k_target;
  return o;
}

}  // namespace vsasrl
