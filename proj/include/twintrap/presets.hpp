// Copyright 2026 The twintrap Authors
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

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "twintrap/config.hpp"

namespace twintrap {

struct Preset {
  std::string_view name;
  std::string_view summary;
  std::string_view text;  // config text, parsed over the defaults
};

// Time is in units of 1/gamma. Targets of 0 mean "hold the occupancy the
// evolution starts from".
inline constexpr std::array kPresets = {
    Preset{"fig2", "single trajectory, two-way thermal pumping", R"(scenario = fig2
kind = trajectory
n1 = 100
n2 = 100
kappa = 0
pump_mode = two_way
horizon = 10
)"},
    Preset{"fig2a", "single trajectory, two-way thermal pumping", R"(scenario = fig2a
kind = trajectory
n1 = 100
n2 = 100
kappa = 0
pump_mode = two_way
horizon = 10
)"},
    Preset{"fig2b", "single trajectory, one-way thermal pumping", R"(scenario = fig2b
kind = trajectory
n1 = 100
n2 = 100
kappa = 0
pump_mode = one_way
horizon = 100
)"},
    Preset{"fig2c", "single trajectory, regular injection with collisions", R"(scenario = fig2c
kind = trajectory
n1 = 100
n2 = 100
kappa = 0.5   # the figure legend quotes 1.0; set kappa = 1 to follow it
pump_mode = regular
horizon = 10
)"},
    Preset{"fig3", "visibility against relative occupancy, one-way pumping", R"(scenario = fig3
kind = scatter
n1 = 100
n2 = 100
kappa = 0
pump_mode = one_way
horizon = 60
burn_in = 20
n_traj = 4
scatter_cap = 10000
)"},
    Preset{"fig3a", "visibility against relative occupancy, two-way pumping", R"(scenario = fig3a
kind = scatter
n1 = 100
n2 = 100
kappa = 0
pump_mode = two_way
horizon = 60
burn_in = 20
n_traj = 4
scatter_cap = 10000
)"},
    Preset{"fig3b", "visibility against relative occupancy, one-way pumping", R"(scenario = fig3b
kind = scatter
n1 = 100
n2 = 100
kappa = 0
pump_mode = one_way
horizon = 60
burn_in = 20
n_traj = 4
scatter_cap = 10000
)"},
    Preset{"fig4", "time-averaged visibility against occupancy ratio", R"(scenario = fig4
kind = p_sweep
kappa = 0
pump_mode = one_way
total_target = 200
p_values = 1, 2, 4
horizon = 400
burn_in = 200
grid_dt = 0.1
n_traj = 50
)"},
    Preset{"fig5", "ensemble visibility, one-way pumping, no collisions or output coupling", R"(scenario = fig5
kind = ensemble
n1 = 100
n2 = 100
kappa = 0
nu1 = 0
nu2 = 0
pump_mode = one_way
horizon = 400
burn_in = 200
grid_dt = 0.1
n_traj = 200
)"},
    Preset{"fig6", "state parameters against collision rate, short times", R"(scenario = fig6
kind = kappa_sweep
n1 = 100
n2 = 100
pump_mode = one_way
kappa_values = 0, 0.1, 0.25, 0.5, 1
statistic = final_time
horizon = 4
n_traj = 200   # the text also mentions five trajectories; use --traj 5
)"},
    Preset{"fig7", "state parameters against collision rate, long times", R"(scenario = fig7
kind = kappa_sweep
n1 = 100
n2 = 100
pump_mode = one_way
kappa_values = 0, 0.1, 0.25, 0.5, 1
statistic = time_average
horizon = 400
burn_in = 200
grid_dt = 0.1
n_traj = 200
)"},
    Preset{"fig8", "collapses and revivals under continual flushing", R"(scenario = fig8
kind = revival
n1 = 500
n2 = 500
initial_detections = 200
gamma = 0      # detection stops after preparation
kappa = 0.25
nu1 = 1        # every atom replaced once per unit time on average
nu2 = 1
pump_mode = one_way
horizon = 100
)"},
    Preset{"fig8a", "collapses and revivals without pumping", R"(scenario = fig8a
kind = revival
n1 = 500
n2 = 500
initial_detections = 200
gamma = 0
kappa = 0.25
pump_mode = none
horizon = 60
)"},
    Preset{"oracle-check", "trajectory ensemble against the dense master equation", R"(scenario = oracle-check
kind = oracle
n1 = 2
n2 = 2
gamma = 1
kappa = 0.3
pump_mode = manual
chi1_in = 0.2
chi2_in = 0.2
n_bath1 = 1
n_bath2 = 1
horizon = 3
n_traj = 5000
oracle_nmax = 14
oracle_points = 10
)"},
};

inline std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

inline ScenarioConfig preset_config(std::string_view name) {
  const auto p = find_preset(name);
  if (!p) throw ConfigError("unknown scenario '" + std::string(name) + "'");
  return parse_config(p->text);
}

}  // namespace twintrap
